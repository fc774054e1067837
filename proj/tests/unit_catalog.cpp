#include <doctest.h>
TEST_SUITE("catalog") {}
