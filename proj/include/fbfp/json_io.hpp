#pragma once

#include <string_view>

#include "json.hpp"

#include "fbfp/linalg.hpp"

namespace fbfp {

nlohmann::json to_json(const Vector& v);
// Row-major nested arrays.
nlohmann::json to_json(const Matrix& m);

// Throws InvalidInput naming `what` on anything but a flat array of finite numbers.
Vector vector_from_json(const nlohmann::json& j, std::string_view what);
// Accepts a rectangular array of arrays (row-major).
Matrix matrix_from_json(const nlohmann::json& j, std::string_view what);

}  // namespace fbfp
