#pragma once

#include <stdexcept>
#include <string>

namespace aed {

// Error categories; the CLI maps these onto its exit-code contract.
enum class errc {
  config,      // bad configuration or invalid input data
  parse,       // malformed file contents
  shape,       // tensor/graph shape violation
  io,          // filesystem failure
  checkpoint,  // corrupt, truncated, or unsupported checkpoint
  missing,     // required artifact (e.g. pretrain checkpoint) absent
  divergence,  // training produced non-finite loss
  numeric,     // domain violation (log of nonpositive, std <= 0, ...)
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace aed
