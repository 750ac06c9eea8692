#pragma once

#include <span>
#include <string_view>

#include "pbftrel/params.hpp"
#include "pbftrel/sparse_generator.hpp"

namespace pbftrel {

// Independent construction of the voting generators from the printed block formulas
// (K/F/L blocks for block generation, G/F/H blocks for orphan generation, D/E/B/C/K/J/A
// blocks for the full cycle). `literal` reproduces the formulas as printed; `corrected`
// applies the entries listed in appendix_errata().
enum class AppendixReading { literal, corrected };

struct AppendixTranscription {
  SparseMatrix block_subgenerator;
  Eigen::VectorXd block_exit;
  SparseMatrix orphan_subgenerator;
  Eigen::VectorXd orphan_exit;
  SparseMatrix full_cycle;
};

AppendixTranscription transcribe_appendix(const SystemParams& params, AppendixReading reading);

struct Erratum {
  std::string_view matrix;
  std::string_view entries;
  std::string_view printed;
  std::string_view corrected;
};

// Printed formulas that contradict rate conservation.
std::span<const Erratum> appendix_errata();

}  // namespace pbftrel
