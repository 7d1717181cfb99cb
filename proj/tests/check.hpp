#pragma once

// citygen::toString(enum) is found by ADL and returns string_view, which
// doctest cannot concatenate; qualify the call so doctest's own overloads win.
#define DOCTEST_STRINGIFY(...) doctest::toString(__VA_ARGS__)
#include <doctest.h>
