#pragma once

// Attribute signature matrix: one column of parameter values per building
// type. Column-restricted views drive both training (known types only) and
// inference (known types plus the one unknown under scrutiny).

#include "linalg.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace zsl {

enum class SignatureSource { expert, svd };

struct SignatureMatrix {
    std::vector<std::string> parameters; // row names
    std::vector<std::string> types;      // column names
    Matrix values;                       // parameters.size() x types.size()
    SignatureSource source = SignatureSource::expert;

    void validate() const {
        if (parameters.empty() || types.empty())
            throw std::invalid_argument("signature: parameter and type lists must be non-empty");
        if (values.rows != parameters.size() || values.cols != types.size())
            throw std::invalid_argument("signature: value matrix is " +
                                        std::to_string(values.rows) + "x" +
                                        std::to_string(values.cols) + ", expected " +
                                        std::to_string(parameters.size()) + "x" +
                                        std::to_string(types.size()));
        std::unordered_set<std::string> seen;
        for (const auto& p : parameters)
            if (!seen.insert(p).second)
                throw std::invalid_argument("signature: duplicate parameter '" + p + "'");
        seen.clear();
        for (const auto& t : types)
            if (!seen.insert(t).second)
                throw std::invalid_argument("signature: duplicate type '" + t + "'");
        if (!values.all_finite())
            throw std::invalid_argument("signature: values must be finite");
    }

    int type_index(const std::string& type) const {
        for (std::size_t i = 0; i < types.size(); ++i)
            if (types[i] == type) return static_cast<int>(i);
        return -1;
    }

    Matrix column(const std::string& type) const {
        const int c = type_index(type);
        if (c < 0) throw std::invalid_argument("signature: no column for type '" + type + "'");
        Matrix out(parameters.size(), 1);
        for (std::size_t r = 0; r < parameters.size(); ++r) out(r, 0) = values(r, c);
        return out;
    }

    // Restriction to the named types, preserving this matrix's column order.
    SignatureMatrix restrict_to(const std::vector<std::string>& keep) const {
        std::unordered_set<std::string> want(keep.begin(), keep.end());
        if (want.size() != keep.size())
            throw std::invalid_argument("signature: duplicate type in restriction");
        for (const auto& t : keep)
            if (type_index(t) < 0)
                throw std::invalid_argument("signature: no column for type '" + t + "'");
        SignatureMatrix out;
        out.parameters = parameters;
        out.source = source;
        std::vector<std::size_t> cols;
        for (std::size_t c = 0; c < types.size(); ++c)
            if (want.count(types[c])) {
                out.types.push_back(types[c]);
                cols.push_back(c);
            }
        out.values = Matrix(parameters.size(), cols.size());
        for (std::size_t r = 0; r < parameters.size(); ++r)
            for (std::size_t j = 0; j < cols.size(); ++j) out.values(r, j) = values(r, cols[j]);
        return out;
    }

    // Complement view: every column except the named ones, original order.
    SignatureMatrix drop_columns(const std::vector<std::string>& dropped) const {
        std::unordered_set<std::string> gone(dropped.begin(), dropped.end());
        for (const auto& t : dropped)
            if (type_index(t) < 0)
                throw std::invalid_argument("signature: no column for type '" + t + "'");
        std::vector<std::string> keep;
        for (const auto& t : types)
            if (!gone.count(t)) keep.push_back(t);
        if (keep.empty()) throw std::invalid_argument("signature: restriction drops every column");
        return restrict_to(keep);
    }

    // Appends one column on the right; used to build S' = S plus the unknown.
    SignatureMatrix with_column(const std::string& type, const Matrix& col) const {
        if (type_index(type) >= 0)
            throw std::invalid_argument("signature: type '" + type + "' already present");
        if (col.rows != parameters.size() || col.cols != 1)
            throw std::invalid_argument("signature: appended column has wrong shape");
        SignatureMatrix out;
        out.parameters = parameters;
        out.source = source;
        out.types = types;
        out.types.push_back(type);
        out.values = Matrix(parameters.size(), types.size() + 1);
        for (std::size_t r = 0; r < parameters.size(); ++r) {
            for (std::size_t c = 0; c < types.size(); ++c) out.values(r, c) = values(r, c);
            out.values(r, types.size()) = col(r, 0);
        }
        return out;
    }

    bool operator==(const SignatureMatrix& o) const {
        return parameters == o.parameters && types == o.types && values == o.values &&
               source == o.source;
    }
};

} // namespace zsl
