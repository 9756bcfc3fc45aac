#include "walldetect/parallel.hpp"

namespace walldetect {

std::size_t worker_count(std::size_t requested) noexcept {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace walldetect
