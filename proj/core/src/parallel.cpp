#include "basket/parallel.hpp"

#include <cstdlib>
#include <string>

namespace basket {

unsigned default_threads() {
    if (const char* env = std::getenv("BASKET_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
            // fall through to hardware concurrency
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace basket
