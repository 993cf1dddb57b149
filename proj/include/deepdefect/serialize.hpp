#ifndef DEEPDEFECT_SERIALIZE_HPP
#define DEEPDEFECT_SERIALIZE_HPP

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

#include "deepdefect/dbn.hpp"
#include "deepdefect/error.hpp"

namespace deepdefect {

enum class ModelKind { Dbn, Ssae };

inline std::string model_kind_name(ModelKind k) { return k == ModelKind::Dbn ? "dbn" : "ssae"; }

inline ModelKind parse_model_kind(const std::string& s) {
    if (s == "dbn") return ModelKind::Dbn;
    if (s == "ssae") return ModelKind::Ssae;
    throw ConfigError("invalid model '" + s + "' (expected dbn or ssae)");
}

inline constexpr int kModelFormatVersion = 1;

struct SavedModel {
    ModelKind kind = ModelKind::Dbn;
    FeedforwardClassifier classifier;
};

// Text format:
//   deepdefect-model
//   version 1
//   kind dbn|ssae
//   hidden_layers L
//   matrix R C  <R*C values, row-major>
//   vector N    <N values>
// with one matrix/vector pair per hidden layer followed by the head.
// Values use 17 significant digits so a reload is bit-exact.

namespace detail {

inline void write_matrix(std::ostream& out, const Matrix& m) {
    out << "matrix " << m.rows() << ' ' << m.cols() << '\n';
    char buf[32];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            out << (c ? " " : "") << buf;
        }
        out << '\n';
    }
}

inline void write_vector(std::ostream& out, const Vector& v) {
    out << "vector " << v.size() << '\n';
    char buf[32];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v(i));
        out << (i ? " " : "") << buf;
    }
    out << '\n';
}

inline void expect_token(std::istream& in, const std::string& want) {
    std::string got;
    if (!(in >> got) || got != want) throw ParseError("model file: expected '" + want + "', found '" + got + "'");
}

inline Eigen::Index read_count(std::istream& in) {
    long long n = -1;
    if (!(in >> n) || n < 0) throw ParseError("model file: bad dimension");
    return static_cast<Eigen::Index>(n);
}

inline double read_value(std::istream& in) {
    std::string tok;
    if (!(in >> tok)) throw ParseError("model file: truncated");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) throw ParseError("model file: bad number '" + tok + "'");
    return v;
}

inline Matrix read_matrix(std::istream& in) {
    expect_token(in, "matrix");
    const auto rows = read_count(in);
    const auto cols = read_count(in);
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = read_value(in);
    return m;
}

inline Vector read_vector(std::istream& in) {
    expect_token(in, "vector");
    const auto n = read_count(in);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = read_value(in);
    return v;
}

}  // namespace detail

inline void save_model(std::ostream& out, const SavedModel& model) {
    out << "deepdefect-model\nversion " << kModelFormatVersion << "\nkind " << model_kind_name(model.kind)
        << "\nhidden_layers " << model.classifier.hidden.size() << '\n';
    for (const auto& l : model.classifier.hidden) {
        detail::write_matrix(out, l.weights);
        detail::write_vector(out, l.bias);
    }
    detail::write_matrix(out, model.classifier.head.weights);
    detail::write_vector(out, model.classifier.head.bias);
    if (!out) throw IoError("failed writing model");
}

inline SavedModel load_model(std::istream& in) {
    detail::expect_token(in, "deepdefect-model");
    detail::expect_token(in, "version");
    const auto version = detail::read_count(in);
    if (version != kModelFormatVersion) throw ParseError("model file: unsupported version " + std::to_string(version));
    detail::expect_token(in, "kind");
    std::string kind;
    in >> kind;
    SavedModel model;
    try {
        model.kind = parse_model_kind(kind);
    } catch (const ConfigError&) {
        throw ParseError("model file: unknown kind '" + kind + "'");
    }
    detail::expect_token(in, "hidden_layers");
    const auto layers = detail::read_count(in);
    for (Eigen::Index i = 0; i < layers; ++i) {
        DenseLayer l;
        l.weights = detail::read_matrix(in);
        l.bias = detail::read_vector(in);
        model.classifier.hidden.push_back(std::move(l));
    }
    model.classifier.head.weights = detail::read_matrix(in);
    model.classifier.head.bias = detail::read_vector(in);
    detail::check_classifier_shapes(model.classifier);
    return model;
}

}  // namespace deepdefect

#endif  // DEEPDEFECT_SERIALIZE_HPP
