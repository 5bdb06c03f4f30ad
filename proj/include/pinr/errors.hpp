#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinr {

// Operand shapes disagree (matmul inner dims, binary elementwise ops, batch lengths).
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller broke an operation's precondition (non-scalar loss, bad parameter list, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid user configuration: band shortfalls, bad mask parameters, degenerate camera.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Unsupported or unreadable image file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelErrorCode { kIo, kBadMagic, kVersionMismatch, kTruncated, kUnsupported };

class ModelFileError : public std::runtime_error {
 public:
  ModelFileError(ModelErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ModelErrorCode code() const noexcept { return code_; }

 private:
  ModelErrorCode code_;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, std::size_t iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

// Training produced a non-finite loss.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int epoch, std::size_t batch)
      : std::runtime_error(what), epoch_(epoch), batch_(batch) {}
  int epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  int epoch_;
  std::size_t batch_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace pinr
