#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "credrag/log.hpp"

int main(int argc, char** argv) {
    // Expected failures in these tests log warnings; keep the output readable.
    credrag::set_log_level(credrag::LogLevel::Error);
    doctest::Context context(argc, argv);
    return context.run();
}
