#include "secrel/pipeline.hpp"
