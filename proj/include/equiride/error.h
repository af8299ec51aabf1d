#pragma once

#include <stdexcept>
#include <string>

namespace equiride {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad or missing configuration (column map, populations, scenario).
struct config_error : error {
  using error::error;
};

// config_error pinned to one field of a JSON document ("scenario.p_min").
struct field_error : config_error {
  field_error(std::string field_name, std::string const& what)
      : config_error{field_name + ": " + what}, field{std::move(field_name)}, message{what} {}
  std::string field;
  std::string message;
};

// Input data that cannot support the requested computation.
struct data_error : error {
  using error::error;
};

// An estimator could not produce a value (empty window, rank deficiency).
struct estimation_error : error {
  using error::error;
};

// Caller violated a precondition.
struct argument_error : error {
  using error::error;
};

// A ratio whose denominator is zero or whose groups are missing.
struct undefined_ratio_error : error {
  using error::error;
};

// A pipeline stage's upstream artifact is absent (missing) or no longer
// matches the hash recorded when it was written (stale).
struct stage_error : error {
  stage_error(std::string stage_name, std::string const& what)
      : error{what}, stage{std::move(stage_name)} {}
  std::string stage;
};

struct missing_artifact_error : stage_error {
  using stage_error::stage_error;
};

struct stale_artifact_error : stage_error {
  using stage_error::stage_error;
};

}  // namespace equiride
