#pragma once

#include "mkvlab/coeff_calc.hpp"
#include "mkvlab/coefficient_fn.hpp"
#include "mkvlab/model.hpp"
#include "mkvlab/modulus.hpp"
#include "mkvlab/sde_engine.hpp"

#include "json.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mkvlab {

using Json = nlohmann::json;

/// Strict view of a JSON value: typed accessors report the full path on failure, and
/// finish() rejects object keys that were never read.
class JsonReader {
public:
    JsonReader(const Json& value, std::string path);

    [[nodiscard]] const Json& raw() const { return *value_; }
    [[nodiscard]] const std::string& path() const { return path_; }

    [[nodiscard]] bool has(const std::string& key) const;
    JsonReader at(const std::string& key);
    std::optional<JsonReader> find(const std::string& key);
    /// Mark a key as consumed without reading it.
    void skip(const std::string& key);

    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] JsonReader element(std::size_t i) const;

    [[nodiscard]] double number() const;
    [[nodiscard]] std::uint64_t uint() const;
    [[nodiscard]] std::string string() const;
    [[nodiscard]] bool boolean() const;
    [[nodiscard]] std::vector<double> numbers() const;

    double number_or(const std::string& key, double fallback);
    std::uint64_t uint_or(const std::string& key, std::uint64_t fallback);
    std::string string_or(const std::string& key, const std::string& fallback);
    bool boolean_or(const std::string& key, bool fallback);

    void expect_object() const;
    void expect_array() const;
    void finish() const;

    [[noreturn]] void fail(const std::string& message) const;

private:
    const Json* value_;
    std::string path_;
    std::shared_ptr<std::set<std::string>> consumed_;
};

Json to_json(const CoefficientFn& f);
CoefficientFn coefficient_from_json(JsonReader r);

Json to_json(const Modulus& rho);
Modulus modulus_from_json(JsonReader r);

Json to_json(const ScalarFn& f);
ScalarFn scalar_fn_from_json(JsonReader r);

Json to_json(const PsiFunction& psi);
PsiFunction psi_from_json(JsonReader r);

Json to_json(const MeasureMap& g);
MeasureMap measure_map_from_json(JsonReader r);

Json to_json(const ModelSpec& model);
/// Parses and validates; validation failures are reported as ConfigError at `r.path()`.
ModelSpec model_from_json(JsonReader r);

Json to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(JsonReader r);

Json to_json(const InitialSampler& xi);
InitialSampler sampler_from_json(JsonReader r);

Json to_json(const HolderTermSpec& spec);
HolderTermSpec holder_spec_from_json(JsonReader r);

/// Hex SHA-256 of arbitrary bytes.
std::string sha256_hex(const std::string& bytes);
/// SHA-256 of the canonical JSON form of the model.
std::string model_fingerprint(const ModelSpec& model);

}  // namespace mkvlab
