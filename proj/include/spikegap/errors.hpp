#pragma once

#include <cstdint>
#include <utility>
#include <stdexcept>
#include <string>
#include <vector>

namespace spikegap {

/// Argument outside the mathematical domain of an operation (w > n, n not a multiple of 4, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Request the library cannot honour as configured (e.g. precision beyond the backend cap).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical method could not produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NearDegenerateError : public NumericalError {
 public:
  NearDegenerateError(double cluster_width, std::size_t cluster_size)
      : NumericalError("eigenvalue is not isolated: cluster of " + std::to_string(cluster_size) +
                       " eigenvalues with width " + std::to_string(cluster_width)),
        cluster_width_(cluster_width),
        cluster_size_(cluster_size) {}

  double cluster_width() const noexcept { return cluster_width_; }
  std::size_t cluster_size() const noexcept { return cluster_size_; }

 private:
  double cluster_width_;
  std::size_t cluster_size_;
};

class NoDoubleWellError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MethodInapplicableError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoBarrierError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotFoundError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Qualifiers attached to results that are returned rather than thrown.
enum class Flag : std::uint32_t {
  unresolved = 1u << 0,      // gap below the resolvable precision
  vacuous = 1u << 1,         // bound carries no information (<= 0)
  multimodal = 1u << 2,      // refinement bracket not unimodal
  flat = 1u << 3,            // no isolated minimum on the scanned curve
  edge_minimum = 1u << 4,    // minimum sits on the edge of the scanned bracket
  not_applicable = 1u << 5,  // method preconditions not met; value is a sentinel
  region_i = 1u << 6,
  region_ii = 1u << 7,
  excluded = 1u << 8,  // point omitted from a fit
  failed = 1u << 9,
  level_mismatch = 1u << 10,  // spikeless first excited level is not the spiked one
};

class Flags {
 public:
  constexpr Flags() = default;
  constexpr Flags(Flag f) : bits_(static_cast<std::uint32_t>(f)) {}

  constexpr Flags& set(Flag f) {
    bits_ |= static_cast<std::uint32_t>(f);
    return *this;
  }
  constexpr Flags& merge(Flags other) {
    bits_ |= other.bits_;
    return *this;
  }
  constexpr bool has(Flag f) const { return (bits_ & static_cast<std::uint32_t>(f)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint32_t bits() const { return bits_; }

  std::vector<std::string> names() const {
    static constexpr std::pair<Flag, const char*> kNames[] = {
        {Flag::unresolved, "unresolved"},   {Flag::vacuous, "vacuous"},
        {Flag::multimodal, "multimodal"},   {Flag::flat, "flat"},
        {Flag::edge_minimum, "edge_minimum"}, {Flag::not_applicable, "not_applicable"},
        {Flag::region_i, "region_I"},       {Flag::region_ii, "region_II"},
        {Flag::excluded, "excluded"},       {Flag::failed, "failed"},
        {Flag::level_mismatch, "level_mismatch"},
    };
    std::vector<std::string> out;
    for (const auto& [flag, name] : kNames) {
      if (has(flag)) out.emplace_back(name);
    }
    return out;
  }

  /// '|'-joined flag names, empty string when no flag is set.
  std::string to_string() const {
    std::string out;
    for (const auto& name : names()) {
      if (!out.empty()) out += '|';
      out += name;
    }
    return out;
  }

  friend constexpr bool operator==(Flags, Flags) = default;

 private:
  std::uint32_t bits_ = 0;
};

}  // namespace spikegap
