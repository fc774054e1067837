#include <doctest.h>
TEST_SUITE("recovery") {}
