#pragma once

// Persistence: tensor JSON, binary field/corrector containers, CSV tables, digests, and strict
// JSON config reading.

#include "gradhom/cell_solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace gradhom {

using json = nlohmann::json;
namespace fs = std::filesystem;

json to_json(const Tensor4 &t); // index_order "ijkl"
json to_json(const Tensor5 &t); // index_order "ij,klm"
json to_json(const Tensor6 &t); // index_order "ijk,nlp"
Tensor4 tensor4_from_json(const json &j);
Tensor5 tensor5_from_json(const json &j);
Tensor6 tensor6_from_json(const json &j);

/// "GHFIELD" container: header, then the K, S and A arrays as little-endian doubles.
void write_field(const fs::path &path, const CoefficientField &field);
CoefficientField read_field(const fs::path &path);

using CorrectorSet = std::variant<CorrectorHS1, CorrectorHS2>;

/// "GHCORR" container: regime, grid, then per corrector its index, solve stats and values.
void write_correctors(const fs::path &path, const CorrectorSet &corr);
CorrectorSet read_correctors(const fs::path &path);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Column index; throws ConfigError when absent.
    size_t column(const std::string &name) const;
};

void write_csv(const fs::path &path, const Table &t);
Table read_csv(const fs::path &path);
/// Long format (epsilon, metric, value) over the given metric columns.
Table to_long_format(const Table &t, const std::vector<std::string> &metrics);
void write_long_csv(const fs::path &path, const Table &t, const std::vector<std::string> &metrics);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const fs::path &path);
std::string read_text(const fs::path &path);
void write_text(const fs::path &path, const std::string &text);

/// Parses JSON text; syntax errors become ConfigError with line and column.
json parse_json_text(const std::string &text, const std::string &origin);

/// Strict view of a config object: every key must be consumed before finish(), and errors
/// name the key with its line and column in the source text.
class ConfigReader {
public:
    ConfigReader(const json &obj, std::string origin, std::shared_ptr<const std::string> source,
                 std::string path = "");
    static ConfigReader from_file(const fs::path &path);
    static ConfigReader from_text(const std::string &text, const std::string &origin);

    bool has(const std::string &key) const;
    const json &raw(const std::string &key);
    double number(const std::string &key);
    double number(const std::string &key, double fallback);
    int integer(const std::string &key);
    int integer(const std::string &key, int fallback);
    std::string string(const std::string &key);
    std::string string(const std::string &key, const std::string &fallback);
    std::vector<double> numbers(const std::string &key);
    ConfigReader object(const std::string &key);
    std::vector<ConfigReader> objects(const std::string &key);
    /// Rejects keys that were never read.
    void finish() const;

    [[noreturn]] void fail(const std::string &key, const std::string &message) const;
    const std::string &origin() const { return origin_; }
    const json &value() const { return obj_; }

private:
    json obj_;
    std::string origin_;
    std::shared_ptr<const std::string> source_;
    std::string path_;
    std::set<std::string> used_;

    const json &get(const std::string &key);
    std::string where(const std::string &key) const;
};

} // namespace gradhom
