#include "aed/tensor.hpp"

#include <atomic>

namespace aed {

namespace {
std::atomic<bool> g_checked{true};
}

void set_checked_tensors(bool on) { g_checked.store(on); }
bool checked_tensors() { return g_checked.load(); }

}  // namespace aed
