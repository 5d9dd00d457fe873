#include "mtf/catalog.hpp"

#include <sstream>

namespace mtf {

std::vector<std::string> catalog_names() {
  return {"double-integrator", "triple-integrator", "harmonic",
          "double-integrator-2input", "planar-pendulum"};
}

bool catalog_is_planar(const std::string& name) {
  return name == "planar-pendulum";
}

namespace {

[[noreturn]] void unknown_catalog_name(const std::string& name) {
  std::ostringstream os;
  os << "unknown catalog system '" << name << "'; available:";
  for (const auto& n : catalog_names()) os << " " << n;
  throw std::invalid_argument(os.str());
}

}  // namespace

LinearSystem catalog_linear(const std::string& name) {
  if (name == "double-integrator") {
    Matrix A(2, 2), B(2, 1);
    A << 0, 1, 0, 0;
    B << 0, 1;
    return make_system(name, A, B);
  }
  if (name == "triple-integrator") {
    Matrix A = Matrix::Zero(3, 3), B(3, 1);
    A(0, 1) = 1;
    A(1, 2) = 1;
    B << 0, 0, 1;
    return make_system(name, A, B);
  }
  if (name == "harmonic") {
    Matrix A(2, 2), B(2, 1);
    A << 0, 1, -1, 0;
    B << 0, 1;
    return make_system(name, A, B);
  }
  if (name == "double-integrator-2input") {
    Matrix A(2, 2), B(2, 2);
    A << 0, 1, 0, 0;
    B << 1, 0, 0, 1;
    return make_system(name, A, B);
  }
  unknown_catalog_name(name);
}

LinearSystem resolve_linear_system(const std::string& ref) {
  constexpr const char* prefix = "catalog:";
  if (ref.rfind(prefix, 0) == 0) {
    std::string name = ref.substr(std::string(prefix).size());
    if (catalog_is_planar(name))
      throw std::invalid_argument("catalog system '" + name +
                                  "' is planar nonlinear, not linear");
    return catalog_linear(name);
  }
  return load_system_file(ref);
}

}  // namespace mtf
