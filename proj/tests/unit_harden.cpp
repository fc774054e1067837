#include <doctest.h>
TEST_SUITE("harden") {}
