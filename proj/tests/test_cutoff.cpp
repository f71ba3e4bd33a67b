#include <catch2/catch_amalgamated.hpp>
#include "dnls/dnls.hpp"
