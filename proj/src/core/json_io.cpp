#include "fbfp/json_io.hpp"

#include <cmath>
#include <string>

#include "fbfp/errors.hpp"

namespace fbfp {

nlohmann::json to_json(const Vector& v) {
    auto out = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

nlohmann::json to_json(const Matrix& m) {
    auto out = nlohmann::json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

namespace {

double finite_number(const nlohmann::json& x, std::string_view what) {
    if (!x.is_number()) throw InvalidInput(std::string(what) + ": expected a number");
    const double v = x.get<double>();
    if (!std::isfinite(v)) throw InvalidInput(std::string(what) + ": non-finite entry");
    return v;
}

}  // namespace

Vector vector_from_json(const nlohmann::json& j, std::string_view what) {
    if (!j.is_array()) throw InvalidInput(std::string(what) + ": expected an array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = finite_number(j[i], what);
    return v;
}

Matrix matrix_from_json(const nlohmann::json& j, std::string_view what) {
    if (!j.is_array() || j.empty()) throw InvalidInput(std::string(what) + ": expected a nonempty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) throw InvalidInput(std::string(what) + ": rows must be nonempty arrays");
    Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw InvalidInput(std::string(what) + ": row " + std::to_string(r) + " has the wrong length");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Index>(r), static_cast<Index>(c)) = finite_number(j[r][c], what);
        }
    }
    return m;
}

}  // namespace fbfp
