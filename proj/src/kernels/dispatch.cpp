#include <cstdlib>
#include <cstring>

#include "specstream/kernels.hpp"

namespace specstream {

#if defined(SPECSTREAM_HAVE_AVX2)
namespace detail {
const Kernels* avx2_kernels_table();
}
#endif

const Kernels* avx2_kernels() {
#if defined(SPECSTREAM_HAVE_AVX2)
    if (__builtin_cpu_supports("avx2")) return detail::avx2_kernels_table();
#endif
    return nullptr;
}

const Kernels& active_kernels() {
    static const Kernels* chosen = [] {
        const Kernels* avx2 = avx2_kernels();
        if (const char* force = std::getenv("SPECSTREAM_KERNELS")) {
            if (std::strcmp(force, "scalar") == 0) return &scalar_kernels();
            if (std::strcmp(force, "avx2") == 0 && avx2) return avx2;
        }
        return avx2 ? avx2 : &scalar_kernels();
    }();
    return *chosen;
}

}  // namespace specstream
