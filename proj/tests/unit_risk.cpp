#include <doctest.h>
TEST_SUITE("risk") {}
