#include <doctest.h>
TEST_SUITE("heat") {}
