#include "mixlab/numeric.hpp"

#include <cstdlib>
#include <string>

#ifdef MIXLAB_HAVE_OPENMP
#include <omp.h>
#endif

namespace mixlab {

int thread_count()
{
    int requested = 0;
    if (const char* env = std::getenv("MIXLAB_THREADS")) {
        try {
            requested = std::stoi(env);
        } catch (const std::exception&) {
            requested = 0;
        }
    }
#ifdef MIXLAB_HAVE_OPENMP
    const int hw = omp_get_num_procs();
#else
    const int hw = 1;
#endif
    if (requested <= 0)
        return hw;
    return requested < hw ? requested : hw;
}

} // namespace mixlab
