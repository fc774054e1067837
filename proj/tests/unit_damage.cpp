#include <doctest.h>
TEST_SUITE("damage") {}
