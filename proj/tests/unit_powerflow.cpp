#include <doctest.h>
TEST_SUITE("powerflow") {}
