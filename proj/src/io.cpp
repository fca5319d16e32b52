#include "gradhom/io.hpp"

#include "gradhom/errors.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace gradhom {

static_assert(std::endian::native == std::endian::little, "binary containers assume a little-endian host");

// ---- tensors -------------------------------------------------------------------------------

namespace {

json nest(std::span<const double> flat, int d, int depth, size_t offset, size_t stride) {
    json arr = json::array();
    if (depth == 1) {
        for (int i = 0; i < d; ++i)
            arr.push_back(flat[offset + static_cast<size_t>(i)]);
        return arr;
    }
    const size_t sub = stride / static_cast<size_t>(d);
    for (int i = 0; i < d; ++i)
        arr.push_back(nest(flat, d, depth - 1, offset + static_cast<size_t>(i) * sub, sub));
    return arr;
}

void unnest(const json &j, int d, int depth, std::vector<double> &out) {
    if (!j.is_array() || static_cast<int>(j.size()) != d)
        throw ConfigError("tensor data must be nested arrays of length d=" + std::to_string(d));
    for (const auto &e : j) {
        if (depth == 1) {
            if (!e.is_number())
                throw ConfigError("tensor entries must be numbers");
            out.push_back(e.get<double>());
        } else {
            unnest(e, d, depth - 1, out);
        }
    }
}

template <int Order>
json tensor_json(const DenseTensor<Order> &t, const char *order) {
    const auto flat = t.data();
    return json{{"d", t.dim()}, {"index_order", order}, {"data", nest(flat, t.dim(), Order, 0, flat.size())}};
}

template <int Order>
DenseTensor<Order> tensor_from(const json &j, const char *order) {
    if (!j.is_object() || !j.contains("d") || !j.contains("data"))
        throw ConfigError("tensor JSON needs 'd' and 'data'");
    if (j.contains("index_order") && j["index_order"] != order)
        throw ConfigError(std::string("expected index_order '") + order + "'");
    const int d = j["d"].get<int>();
    std::vector<double> flat;
    unnest(j["data"], d, Order, flat);
    return DenseTensor<Order>(d, std::move(flat));
}

} // namespace

json to_json(const Tensor4 &t) { return tensor_json(t, "ijkl"); }
json to_json(const Tensor5 &t) { return tensor_json(t, "ij,klm"); }
json to_json(const Tensor6 &t) { return tensor_json(t, "ijk,nlp"); }
Tensor4 tensor4_from_json(const json &j) { return tensor_from<4>(j, "ijkl"); }
Tensor5 tensor5_from_json(const json &j) { return tensor_from<5>(j, "ij,klm"); }
Tensor6 tensor6_from_json(const json &j) { return tensor_from<6>(j, "ijk,nlp"); }

// ---- binary containers ---------------------------------------------------------------------

namespace {

constexpr char kFieldMagic[8] = {'G', 'H', 'F', 'I', 'E', 'L', 'D', '\0'};
constexpr char kCorrMagic[8] = {'G', 'H', 'C', 'O', 'R', 'R', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(const fs::path &path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_)
            throw ConfigError("cannot open " + path.string() + " for writing");
    }
    void bytes(const void *p, size_t n) { out_.write(static_cast<const char *>(p), static_cast<std::streamsize>(n)); }
    template <typename T>
    void pod(T v) { bytes(&v, sizeof v); }
    void doubles(std::span<const double> v) { bytes(v.data(), v.size() * sizeof(double)); }
    void close() {
        out_.close();
        if (!out_)
            throw ConfigError("failed writing " + path_.string());
    }

private:
    fs::path path_;
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const fs::path &path) : path_(path), in_(path, std::ios::binary) {
        if (!in_)
            throw ConfigError("cannot open " + path.string());
    }
    void bytes(void *p, size_t n) {
        in_.read(static_cast<char *>(p), static_cast<std::streamsize>(n));
        if (!in_)
            throw ConfigError(path_.string() + ": truncated file");
    }
    template <typename T>
    T pod() {
        T v;
        bytes(&v, sizeof v);
        return v;
    }
    void doubles(std::vector<double> &v, size_t n) {
        v.resize(n);
        bytes(v.data(), n * sizeof(double));
    }
    void magic(const char (&expected)[8]) {
        char m[8];
        bytes(m, 8);
        if (std::memcmp(m, expected, 8) != 0)
            throw ConfigError(path_.string() + ": not a " + std::string(expected) + " file");
        if (pod<std::uint32_t>() != kVersion)
            throw ConfigError(path_.string() + ": unsupported container version");
    }
    void expect_end() {
        if (in_.peek() != std::char_traits<char>::eof())
            throw ConfigError(path_.string() + ": trailing bytes");
    }
    const fs::path &path() const { return path_; }

private:
    fs::path path_;
    std::ifstream in_;
};

CellGrid read_grid(Reader &r) {
    const auto d = r.pod<std::uint32_t>();
    const auto n = r.pod<std::uint32_t>();
    try {
        return CellGrid(static_cast<int>(d), static_cast<int>(n));
    } catch (const Error &e) {
        throw ConfigError(r.path().string() + ": bad grid header: " + e.what());
    }
}

void write_vector_field(Writer &w, const PeriodicVectorField &f, const SolveStats &s) {
    w.pod(static_cast<std::uint32_t>(f.components));
    w.pod(static_cast<std::int32_t>(s.iterations));
    w.pod(s.residual);
    w.doubles(f.data);
}

PeriodicVectorField read_vector_field(Reader &r, const CellGrid &grid, SolveStats &s) {
    const auto comps = r.pod<std::uint32_t>();
    s.iterations = r.pod<std::int32_t>();
    s.residual = r.pod<double>();
    PeriodicVectorField f(grid, static_cast<int>(comps));
    r.doubles(f.data, f.data.size());
    return f;
}

} // namespace

void write_field(const fs::path &path, const CoefficientField &field) {
    Writer w(path);
    w.bytes(kFieldMagic, 8);
    w.pod(kVersion);
    w.pod(static_cast<std::uint32_t>(field.dim()));
    w.pod(static_cast<std::uint32_t>(field.grid().n()));
    w.doubles(field.K_all());
    w.doubles(field.S_all());
    w.doubles(field.A_all());
    w.close();
}

CoefficientField read_field(const fs::path &path) {
    Reader r(path);
    r.magic(kFieldMagic);
    const CellGrid grid = read_grid(r);
    CoefficientField field(grid);
    std::vector<double> K, S, A;
    const size_t nn = grid.num_nodes();
    const int d = grid.dim();
    r.doubles(K, nn * static_cast<size_t>(ipow(d, 4)));
    r.doubles(S, nn * static_cast<size_t>(ipow(d, 5)));
    r.doubles(A, nn * static_cast<size_t>(ipow(d, 6)));
    r.expect_end();
    const size_t k = static_cast<size_t>(ipow(d, 4)), s = static_cast<size_t>(ipow(d, 5)),
                 a = static_cast<size_t>(ipow(d, 6));
    for (size_t node = 0; node < nn; ++node)
        field.set_raw(node, std::span<const double>(K).subspan(node * k, k),
                      std::span<const double>(S).subspan(node * s, s),
                      std::span<const double>(A).subspan(node * a, a));
    return field;
}

void write_correctors(const fs::path &path, const CorrectorSet &corr) {
    Writer w(path);
    w.bytes(kCorrMagic, 8);
    w.pod(kVersion);
    std::visit(
        [&](const auto &c) {
            using T = std::decay_t<decltype(c)>;
            constexpr bool hs1 = std::is_same_v<T, CorrectorHS1>;
            const auto &fields = [&]() -> const std::vector<PeriodicVectorField> & {
                if constexpr (hs1)
                    return c.phi;
                else
                    return c.w;
            }();
            w.pod(static_cast<std::uint32_t>(hs1 ? 1 : 2));
            w.pod(static_cast<std::uint32_t>(c.grid.dim()));
            w.pod(static_cast<std::uint32_t>(c.grid.n()));
            w.pod(static_cast<std::uint32_t>(fields.size()));
            for (size_t i = 0; i < fields.size(); ++i)
                write_vector_field(w, fields[i], i < c.stats.size() ? c.stats[i] : SolveStats{});
        },
        corr);
    w.close();
}

CorrectorSet read_correctors(const fs::path &path) {
    Reader r(path);
    r.magic(kCorrMagic);
    const auto regime = r.pod<std::uint32_t>();
    if (regime != 1 && regime != 2)
        throw ConfigError(path.string() + ": unknown regime tag");
    const CellGrid grid = read_grid(r);
    const int d = grid.dim();
    const auto count = r.pod<std::uint32_t>();
    const size_t expected = static_cast<size_t>(regime == 1 ? d * d : d * d * d);
    if (count != expected)
        throw ConfigError(path.string() + ": corrector count does not match the dimension");
    std::vector<PeriodicVectorField> fields(count);
    std::vector<SolveStats> stats(count);
    for (size_t i = 0; i < count; ++i) {
        fields[i] = read_vector_field(r, grid, stats[i]);
        if (fields[i].components != d)
            throw ConfigError(path.string() + ": corrector has wrong component count");
    }
    r.expect_end();
    if (regime == 1)
        return CorrectorHS1{grid, d, std::move(fields), std::move(stats)};
    return CorrectorHS2{grid, d, std::move(fields), std::move(stats)};
}

// ---- tables --------------------------------------------------------------------------------

size_t Table::column(const std::string &name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    throw ConfigError("table has no column '" + name + "'");
}

namespace {

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

std::vector<std::string> split_csv(const std::string &line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream s(line);
    while (std::getline(s, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

} // namespace

void write_csv(const fs::path &path, const Table &t) {
    std::ostringstream s;
    for (size_t i = 0; i < t.header.size(); ++i)
        s << (i ? "," : "") << t.header[i];
    s << '\n';
    for (const auto &row : t.rows) {
        if (row.size() != t.header.size())
            throw DimensionMismatch("table row width differs from header");
        for (size_t i = 0; i < row.size(); ++i)
            s << (i ? "," : "") << fmt(row[i]);
        s << '\n';
    }
    write_text(path, s.str());
}

Table read_csv(const fs::path &path) {
    std::istringstream in(read_text(path));
    Table t;
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError(path.string() + ": empty table");
    t.header = split_csv(line);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto cells = split_csv(line);
        if (cells.size() != t.header.size())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(t.header.size()) + " columns");
        std::vector<double> row;
        for (const auto &c : cells) {
            try {
                size_t used = 0;
                row.push_back(std::stod(c, &used));
                if (used != c.size())
                    throw std::invalid_argument(c);
            } catch (const std::logic_error &) {
                throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": '" + c + "' is not a number");
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table to_long_format(const Table &t, const std::vector<std::string> &metrics) {
    const size_t eps_col = t.column("epsilon");
    std::vector<size_t> cols;
    for (const auto &m : metrics)
        cols.push_back(t.column(m));
    Table out;
    out.header = {"epsilon", "metric", "value"};
    // metric is stored as its position in `metrics`; write_long_csv prints the name
    for (const auto &row : t.rows)
        for (size_t k = 0; k < cols.size(); ++k)
            out.rows.push_back({row[eps_col], static_cast<double>(k), row[cols[k]]});
    return out;
}

void write_long_csv(const fs::path &path, const Table &t, const std::vector<std::string> &metrics) {
    const auto tidy = to_long_format(t, metrics);
    std::ostringstream s;
    s << "epsilon,metric,value\n";
    for (const auto &row : tidy.rows)
        s << fmt(row[0]) << ',' << metrics[static_cast<size_t>(row[1])] << ',' << fmt(row[2]) << '\n';
    write_text(path, s.str());
}

// ---- digests and text ----------------------------------------------------------------------

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericError("SHA-256 failed");
    std::ostringstream s;
    for (unsigned int i = 0; i < len; ++i)
        s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return s.str();
}

std::string file_sha256(const fs::path &path) { return sha256_hex(read_text(path)); }

std::string read_text(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ConfigError("cannot open " + path.string() + " for writing");
    out << text;
    out.close();
    if (!out)
        throw ConfigError("failed writing " + path.string());
}

// ---- configs -------------------------------------------------------------------------------

namespace {

std::pair<size_t, size_t> line_col(const std::string &text, size_t offset) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace

json parse_json_text(const std::string &text, const std::string &origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
}

ConfigReader::ConfigReader(const json &obj, std::string origin, std::shared_ptr<const std::string> source,
                           std::string path)
    : obj_(obj), origin_(std::move(origin)), source_(std::move(source)), path_(std::move(path)) {
    if (!obj_.is_object())
        throw ConfigError(origin_ + ": " + (path_.empty() ? std::string("config") : path_) + " must be an object");
}

ConfigReader ConfigReader::from_file(const fs::path &path) {
    return from_text(read_text(path), path.string());
}

ConfigReader ConfigReader::from_text(const std::string &text, const std::string &origin) {
    auto src = std::make_shared<const std::string>(text);
    return ConfigReader(parse_json_text(*src, origin), origin, src);
}

std::string ConfigReader::where(const std::string &key) const {
    std::string loc = origin_;
    if (source_) {
        const auto pos = source_->find("\"" + key + "\"");
        if (pos != std::string::npos) {
            const auto [line, col] = line_col(*source_, pos);
            loc += ":" + std::to_string(line) + ":" + std::to_string(col);
        }
    }
    return loc;
}

void ConfigReader::fail(const std::string &key, const std::string &message) const {
    const std::string name = path_.empty() ? key : path_ + "." + key;
    throw ConfigError(where(key) + ": '" + name + "': " + message);
}

bool ConfigReader::has(const std::string &key) const { return obj_.contains(key); }

const json &ConfigReader::get(const std::string &key) {
    if (!obj_.contains(key))
        fail(key, "required key missing");
    used_.insert(key);
    return obj_.at(key);
}

const json &ConfigReader::raw(const std::string &key) { return get(key); }

double ConfigReader::number(const std::string &key) {
    const auto &v = get(key);
    if (!v.is_number())
        fail(key, "expected a number");
    return v.get<double>();
}

double ConfigReader::number(const std::string &key, double fallback) {
    return has(key) ? number(key) : fallback;
}

int ConfigReader::integer(const std::string &key) {
    const auto &v = get(key);
    if (!v.is_number_integer())
        fail(key, "expected an integer");
    return v.get<int>();
}

int ConfigReader::integer(const std::string &key, int fallback) {
    return has(key) ? integer(key) : fallback;
}

std::string ConfigReader::string(const std::string &key) {
    const auto &v = get(key);
    if (!v.is_string())
        fail(key, "expected a string");
    return v.get<std::string>();
}

std::string ConfigReader::string(const std::string &key, const std::string &fallback) {
    return has(key) ? string(key) : fallback;
}

std::vector<double> ConfigReader::numbers(const std::string &key) {
    const auto &v = get(key);
    if (!v.is_array())
        fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto &e : v) {
        if (!e.is_number())
            fail(key, "expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

ConfigReader ConfigReader::object(const std::string &key) {
    const auto &v = get(key);
    if (!v.is_object())
        fail(key, "expected an object");
    return ConfigReader(v, origin_, source_, path_.empty() ? key : path_ + "." + key);
}

std::vector<ConfigReader> ConfigReader::objects(const std::string &key) {
    const auto &v = get(key);
    if (!v.is_array())
        fail(key, "expected an array of objects");
    std::vector<ConfigReader> out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_object())
            fail(key, "expected an array of objects");
        out.emplace_back(v[i], origin_, source_,
                         (path_.empty() ? key : path_ + "." + key) + "[" + std::to_string(i) + "]");
    }
    return out;
}

void ConfigReader::finish() const {
    for (const auto &[k, v] : obj_.items())
        if (!used_.count(k))
            fail(k, "unknown key");
}

} // namespace gradhom
