#include <doctest.h>
TEST_SUITE("windfield") {}
