#pragma once

#include <nlohmann/json_fwd.hpp>

#include "mtf/types.hpp"

namespace mtf {

// Linear control system xdot = Ax + Bu with componentwise |u_i| <= 1.
// Immutable after construction; derived quantities are computed once.
struct LinearSystem {
  std::string name;
  int N = 0;  // state dimension
  int M = 0;  // input dimension
  Matrix A;
  Matrix B;

  // Per column i, rank of [b_i, A b_i, ..., A^{N-1} b_i].
  std::vector<int> column_ranks;
  // True when every column reaches full rank N.
  bool normal = false;
  // rank of B; the singular set is empty exactly when this equals N.
  int input_rank = 0;
  // Spectral norm of A, used to scale tolerances and sampling steps.
  double a_norm = 0.0;

  std::vector<std::string> warnings;

  Vector column(int i) const { return B.col(i); }
};

// Builds a system and fills in the derived fields.  Throws
// std::invalid_argument on malformed shapes; a rank-deficient column only
// sets normal = false and appends a warning.
LinearSystem make_system(std::string name, Matrix A, Matrix B);

// Per-column Kalman ranks rank[b_i, A b_i, ..., A^{N-1} b_i].
std::vector<int> column_kalman_ranks(const Matrix& A, const Matrix& B);

// True when the singular set of the system is empty (input_rank == N).
bool singular_set_is_empty(const LinearSystem& sys);

// Throws AssumptionError unless every input column is normal.
void require_normal(const LinearSystem& sys, const char* where);

// JSON round trip.  The document format is
//   {"name": str, "N": int, "M": int, "A": [N*N row-major], "B": [N*M row-major]}
LinearSystem load_system(const nlohmann::json& doc);
LinearSystem load_system_file(const std::string& path);
nlohmann::json system_to_json(const LinearSystem& sys);

}  // namespace mtf
