#include "mtf/system.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

#include "mtf/expm.hpp"

namespace mtf {

std::vector<int> column_kalman_ranks(const Matrix& A, const Matrix& B) {
  const int N = static_cast<int>(A.rows());
  const int M = static_cast<int>(B.cols());
  std::vector<int> ranks(M, 0);
  for (int i = 0; i < M; ++i) {
    auto chain = krylov_chain(A, B.col(i), N);
    Matrix K(N, N);
    for (int j = 0; j < N; ++j) K.col(j) = chain[j];
    Eigen::ColPivHouseholderQR<Matrix> qr(K);
    qr.setThreshold(1e-10);
    ranks[i] = static_cast<int>(qr.rank());
  }
  return ranks;
}

LinearSystem make_system(std::string name, Matrix A, Matrix B) {
  if (A.rows() != A.cols()) throw std::invalid_argument("system: A must be square");
  if (B.rows() != A.rows()) throw std::invalid_argument("system: B row count must match A");
  if (B.cols() < 1) throw std::invalid_argument("system: need at least one input column");
  if (B.cols() > A.rows())
    throw std::invalid_argument("system: more input columns than states (M > N)");
  if (!A.allFinite() || !B.allFinite())
    throw std::invalid_argument("system: non-finite entries");

  LinearSystem sys;
  sys.name = std::move(name);
  sys.N = static_cast<int>(A.rows());
  sys.M = static_cast<int>(B.cols());
  sys.A = std::move(A);
  sys.B = std::move(B);

  sys.column_ranks = column_kalman_ranks(sys.A, sys.B);
  sys.normal = true;
  for (int i = 0; i < sys.M; ++i) {
    if (sys.column_ranks[i] < sys.N) {
      sys.normal = false;
      sys.warnings.push_back("input column " + std::to_string(i) +
                             " is not normal (Kalman rank " +
                             std::to_string(sys.column_ranks[i]) + " of " +
                             std::to_string(sys.N) + ")");
    }
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(sys.B);
  qr.setThreshold(1e-10);
  sys.input_rank = static_cast<int>(qr.rank());

  Eigen::JacobiSVD<Matrix> svd(sys.A);
  sys.a_norm = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  return sys;
}

bool singular_set_is_empty(const LinearSystem& sys) {
  return sys.input_rank == sys.N;
}

void require_normal(const LinearSystem& sys, const char* where) {
  if (!sys.normal)
    throw AssumptionError(std::string(where) + ": system '" + sys.name +
                          "' violates per-column normality");
}

namespace {

Matrix matrix_from_flat(const nlohmann::json& arr, int rows, int cols,
                        const char* field) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != rows * cols)
    throw std::invalid_argument(std::string("system document: field ") + field +
                                " must be a flat row-major array of length " +
                                std::to_string(rows * cols));
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = arr[r * cols + c].get<double>();
  return m;
}

}  // namespace

LinearSystem load_system(const nlohmann::json& doc) {
  for (const char* key : {"name", "N", "M", "A", "B"})
    if (!doc.contains(key))
      throw std::invalid_argument(std::string("system document: missing field ") + key);
  const int N = doc["N"].get<int>();
  const int M = doc["M"].get<int>();
  if (N < 1 || N > 16 || M < 1 || M > 16)
    throw std::invalid_argument("system document: dimensions out of range");
  Matrix A = matrix_from_flat(doc["A"], N, N, "A");
  Matrix B = matrix_from_flat(doc["B"], N, M, "B");
  return make_system(doc["name"].get<std::string>(), std::move(A), std::move(B));
}

LinearSystem load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open system file: " + path);
  nlohmann::json doc;
  in >> doc;
  return load_system(doc);
}

nlohmann::json system_to_json(const LinearSystem& sys) {
  nlohmann::json doc;
  doc["name"] = sys.name;
  doc["N"] = sys.N;
  doc["M"] = sys.M;
  std::vector<double> a, b;
  for (int r = 0; r < sys.N; ++r)
    for (int c = 0; c < sys.N; ++c) a.push_back(sys.A(r, c));
  for (int r = 0; r < sys.N; ++r)
    for (int c = 0; c < sys.M; ++c) b.push_back(sys.B(r, c));
  doc["A"] = a;
  doc["B"] = b;
  return doc;
}

}  // namespace mtf
