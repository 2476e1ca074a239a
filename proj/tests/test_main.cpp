#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "ms2d/fftutil.hpp"

int main(int argc, char** argv) {
    doctest::Context ctx;
    ctx.applyCommandLine(argc, argv);
    int rc = ctx.run();
    ms2d::fft_cleanup();
    return rc;
}
