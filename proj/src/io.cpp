#include "cpdcond/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace cpdcond {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "binary tensor I/O assumes a little-endian host");

std::vector<int> dims_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dims") || !j["dims"].is_array()) {
        throw FormatError("expected an object with a \"dims\" array");
    }
    std::vector<int> dims;
    for (const auto& d : j["dims"]) {
        if (!d.is_number_integer()) throw FormatError("dims must be integers");
        dims.push_back(d.get<int>());
    }
    return dims;
}

Shape shape_from_dims(std::vector<int> dims) {
    try {
        return Shape(std::move(dims));
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
}

Eigen::VectorXd vector_from_json(const json& j) {
    if (!j.is_array()) throw FormatError("expected a numeric array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw FormatError("expected a numeric array");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

json vector_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

template <typename T>
void put(std::ostream& os, T value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T value{};
    if (!is.read(reinterpret_cast<char*>(&value), sizeof(T))) throw IoError("binary tensor: unexpected end of data");
    return value;
}

}  // namespace

json tensor_to_json(const DenseTensor& t) {
    return json{{"dims", t.shape().dims()}, {"values", vector_to_json(t.values())}};
}

DenseTensor tensor_from_json(const json& j) {
    Shape shape = shape_from_dims(dims_from_json(j));
    if (!j.contains("values")) throw FormatError("tensor JSON lacks \"values\"");
    Eigen::VectorXd values = vector_from_json(j["values"]);
    if (values.size() != shape.pi()) {
        throw FormatError("tensor JSON: expected " + std::to_string(shape.pi()) + " values, got " +
                          std::to_string(values.size()));
    }
    return DenseTensor(std::move(shape), std::move(values));
}

void write_tensor_binary(std::ostream& os, const DenseTensor& t) {
    put<std::uint64_t>(os, static_cast<std::uint64_t>(t.shape().order()));
    for (int n : t.shape().dims()) put<std::uint64_t>(os, static_cast<std::uint64_t>(n));
    os.write(reinterpret_cast<const char*>(t.values().data()),
             static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(t.values().size())));
    if (!os) throw IoError("binary tensor: write failed");
}

DenseTensor read_tensor_binary(std::istream& is) {
    const auto d = get<std::uint64_t>(is);
    if (d < 2 || d > 64) throw FormatError("binary tensor: implausible order " + std::to_string(d));
    std::vector<int> dims;
    for (std::uint64_t k = 0; k < d; ++k) {
        const auto n = get<std::uint64_t>(is);
        if (n > (1u << 24)) throw FormatError("binary tensor: implausible dimension");
        dims.push_back(static_cast<int>(n));
    }
    Shape shape = shape_from_dims(std::move(dims));
    Eigen::VectorXd values(shape.pi());
    if (!is.read(reinterpret_cast<char*>(values.data()),
                 static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(values.size())))) {
        throw IoError("binary tensor: truncated values");
    }
    return DenseTensor(std::move(shape), std::move(values));
}

json cpd_to_json(const CPDecomposition& cpd) {
    json terms = json::array();
    for (const auto& term : cpd.terms()) {
        json factors = json::array();
        for (const auto& f : term.factors) factors.push_back(vector_to_json(f));
        terms.push_back({{"scale", term.scale}, {"factors", factors}});
    }
    return json{{"dims", cpd.shape().dims()}, {"terms", terms}};
}

CPDecomposition cpd_from_json(const json& j) {
    Shape shape = shape_from_dims(dims_from_json(j));
    if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty()) {
        throw FormatError("CPD JSON needs a non-empty \"terms\" array");
    }
    std::vector<Rank1Term> terms;
    for (const auto& jt : j["terms"]) {
        if (!jt.is_object() || !jt.contains("factors") || !jt["factors"].is_array()) {
            throw FormatError("each term needs a \"factors\" array");
        }
        std::vector<Eigen::VectorXd> vectors;
        for (const auto& f : jt["factors"]) vectors.push_back(vector_from_json(f));
        if (static_cast<int>(vectors.size()) != shape.order()) throw FormatError("term has the wrong number of factors");
        const double scale = jt.value("scale", 1.0);
        if (!(std::isfinite(scale) && scale != 0.0)) throw FormatError("term scale must be finite and nonzero");
        vectors[0] *= scale;
        try {
            terms.push_back(Rank1Term::from_vectors(std::move(vectors)));
        } catch (const std::invalid_argument& e) {
            throw FormatError(e.what());
        }
    }
    try {
        return CPDecomposition(std::move(shape), std::move(terms));
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace cpdcond
