#include "mkvlab/model_io.hpp"

#include "mkvlab/error.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <limits>

namespace mkvlab {

namespace {

std::string type_name(const Json& j) { return j.type_name(); }

/// Re-raise an InvalidArgument whose message starts with `prefix...: ` as a ConfigError under `base`.
[[noreturn]] void rethrow_at(const InvalidArgument& e, const std::string& prefix, const std::string& base) {
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon != std::string::npos && msg.compare(0, prefix.size(), prefix) == 0) {
        std::string path = base + msg.substr(prefix.size(), colon - prefix.size());
        throw ConfigError(path, msg.substr(colon + 2));
    }
    throw ConfigError(base, msg);
}

double break_from_json(const JsonReader& r) {
    if (r.raw().is_string()) {
        if (r.raw().get<std::string>() == "-inf") return -std::numeric_limits<double>::infinity();
        r.fail("expected a number or \"-inf\"");
    }
    return r.number();
}

Json break_to_json(double b) {
    if (std::isinf(b) && b < 0) return "-inf";
    return b;
}

}  // namespace

JsonReader::JsonReader(const Json& value, std::string path)
    : value_(&value), path_(std::move(path)), consumed_(std::make_shared<std::set<std::string>>()) {}

bool JsonReader::has(const std::string& key) const { return value_->is_object() && value_->contains(key); }

JsonReader JsonReader::at(const std::string& key) {
    expect_object();
    if (!value_->contains(key)) throw ConfigError(path_ + "." + key, "required field is missing");
    consumed_->insert(key);
    return JsonReader(value_->at(key), path_ + "." + key);
}

std::optional<JsonReader> JsonReader::find(const std::string& key) {
    expect_object();
    if (!value_->contains(key)) return std::nullopt;
    consumed_->insert(key);
    const Json& v = value_->at(key);
    if (v.is_null()) return std::nullopt;
    return JsonReader(v, path_ + "." + key);
}

void JsonReader::skip(const std::string& key) { consumed_->insert(key); }

std::size_t JsonReader::size() const {
    expect_array();
    return value_->size();
}

JsonReader JsonReader::element(std::size_t i) const {
    expect_array();
    return JsonReader(value_->at(i), path_ + "[" + std::to_string(i) + "]");
}

double JsonReader::number() const {
    if (!value_->is_number()) fail("expected a number, got " + type_name(*value_));
    const double v = value_->get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
}

std::uint64_t JsonReader::uint() const {
    if (value_->is_number_unsigned()) return value_->get<std::uint64_t>();
    if (value_->is_number_integer() && value_->get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(value_->get<std::int64_t>());
    if (value_->is_string()) {
        // 64-bit seeds may be given as decimal strings.
        const auto s = value_->get<std::string>();
        try {
            std::size_t used = 0;
            const auto v = std::stoull(s, &used, 10);
            if (used == s.size() && !s.empty() && s[0] != '-') return v;
        } catch (const std::exception&) {
        }
    }
    fail("expected a nonnegative integer, got " + type_name(*value_));
}

std::string JsonReader::string() const {
    if (!value_->is_string()) fail("expected a string, got " + type_name(*value_));
    return value_->get<std::string>();
}

bool JsonReader::boolean() const {
    if (!value_->is_boolean()) fail("expected a boolean, got " + type_name(*value_));
    return value_->get<bool>();
}

std::vector<double> JsonReader::numbers() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = element(i).number();
    return out;
}

double JsonReader::number_or(const std::string& key, double fallback) {
    auto r = find(key);
    return r ? r->number() : fallback;
}

std::uint64_t JsonReader::uint_or(const std::string& key, std::uint64_t fallback) {
    auto r = find(key);
    return r ? r->uint() : fallback;
}

std::string JsonReader::string_or(const std::string& key, const std::string& fallback) {
    auto r = find(key);
    return r ? r->string() : fallback;
}

bool JsonReader::boolean_or(const std::string& key, bool fallback) {
    auto r = find(key);
    return r ? r->boolean() : fallback;
}

void JsonReader::expect_object() const {
    if (!value_->is_object()) fail("expected an object, got " + type_name(*value_));
}

void JsonReader::expect_array() const {
    if (!value_->is_array()) fail("expected an array, got " + type_name(*value_));
}

void JsonReader::finish() const {
    if (!value_->is_object()) return;
    for (auto it = value_->begin(); it != value_->end(); ++it)
        if (!consumed_->count(it.key())) throw ConfigError(path_ + "." + it.key(), "unknown key");
}

void JsonReader::fail(const std::string& message) const { throw ConfigError(path_, message); }

// ---------------------------------------------------------------- coefficient functions

Json to_json(const CoefficientFn& f) {
    if (f.is_constant() && std::isinf(f.start())) {
        const auto v = f.values(0.0);
        if (f.is_scalar()) return v[0];
        if (f.cols() == 1) return v;
        Json rows = Json::array();
        for (std::size_t i = 0; i < f.rows(); ++i)
            rows.push_back(std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(i * f.cols()),
                                               v.begin() + static_cast<std::ptrdiff_t>((i + 1) * f.cols())));
        return rows;
    }
    Json j;
    j["rows"] = f.rows();
    j["cols"] = f.cols();
    Json breaks = Json::array();
    for (double b : f.breaks()) breaks.push_back(break_to_json(b));
    j["breaks"] = breaks;
    j["pieces"] = f.pieces();
    return j;
}

CoefficientFn coefficient_from_json(JsonReader r) {
    const Json& j = r.raw();
    try {
        if (j.is_number()) return CoefficientFn::constant(r.number());
        if (j.is_array()) {
            if (j.empty()) r.fail("empty array");
            if (j[0].is_array()) {
                const std::size_t rows = j.size();
                const std::size_t cols = r.element(0).size();
                std::vector<double> values;
                for (std::size_t i = 0; i < rows; ++i) {
                    auto row = r.element(i).numbers();
                    if (row.size() != cols) r.element(i).fail("ragged matrix row");
                    values.insert(values.end(), row.begin(), row.end());
                }
                return CoefficientFn::constant_matrix(rows, cols, std::move(values));
            }
            return CoefficientFn::constant_vector(r.numbers());
        }
        r.expect_object();
        if (r.has("poly")) {
            auto p = r.at("poly").numbers();
            const double t0 = r.number_or("t0", 0.0);
            r.finish();
            return CoefficientFn::polynomial(std::move(p), t0);
        }
        const std::size_t rows = r.uint_or("rows", 1);
        const std::size_t cols = r.uint_or("cols", 1);
        auto br = r.at("breaks");
        std::vector<double> breaks(br.size());
        for (std::size_t k = 0; k < breaks.size(); ++k) breaks[k] = break_from_json(br.element(k));
        auto pr = r.at("pieces");
        std::vector<std::vector<Poly>> pieces(pr.size());
        for (std::size_t k = 0; k < pieces.size(); ++k) {
            auto piece = pr.element(k);
            if (rows * cols == 1 && piece.size() > 0 && piece.raw()[0].is_number()) {
                pieces[k].push_back(piece.numbers());
            } else {
                for (std::size_t e = 0; e < piece.size(); ++e) pieces[k].push_back(piece.element(e).numbers());
            }
        }
        r.finish();
        return CoefficientFn(rows, cols, std::move(breaks), std::move(pieces));
    } catch (const InvalidArgument& e) {
        throw ConfigError(r.path(), e.what());
    }
}

// ---------------------------------------------------------------- moduli

Json to_json(const Modulus& rho) {
    Json j;
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, PowerForm>) {
                j = {{"form", "power"}, {"alpha", f.alpha}, {"scale", f.scale}};
            } else if constexpr (std::is_same_v<T, LinearCapForm>) {
                j = {{"form", "linear"}, {"c", f.c}};
            } else if constexpr (std::is_same_v<T, LogForm>) {
                j = {{"form", "log"}, {"a", f.a}};
            } else if constexpr (std::is_same_v<T, MaxOfForm>) {
                Json members = Json::array();
                for (const auto& m : f.members) members.push_back(to_json(m));
                j = {{"form", "max"}, {"members", members}};
            } else {
                std::vector<double> v, r;
                for (double x : f.log_v) v.push_back(std::exp(x));
                for (double x : f.log_rho) r.push_back(std::exp(x));
                j = {{"form", "table"}, {"v", v}, {"rho", r}};
            }
        },
        rho.form());
    return j;
}

Modulus modulus_from_json(JsonReader r) {
    r.expect_object();
    const std::string form = r.at("form").string();
    try {
        Modulus out = Modulus::power(1.0);
        if (form == "power") {
            out = Modulus::power(r.at("alpha").number(), r.number_or("scale", 1.0));
        } else if (form == "linear") {
            out = Modulus::linear(r.at("c").number());
        } else if (form == "log") {
            out = Modulus::log_modulus(r.at("a").number());
        } else if (form == "max") {
            auto mr = r.at("members");
            std::vector<Modulus> members;
            for (std::size_t k = 0; k < mr.size(); ++k) members.push_back(modulus_from_json(mr.element(k)));
            out = Modulus::max_of(std::move(members));
        } else if (form == "table") {
            out = Modulus::tabulated(r.at("v").numbers(), r.at("rho").numbers());
        } else {
            throw ConfigError(r.path() + ".form", "unknown modulus form '" + form + "'");
        }
        if (auto inc = r.find("increasing")) out.declare_increasing(inc->boolean());
        if (r.has("concavity_exponent")) {
            auto c = r.find("concavity_exponent");
            out.declare_concavity_exponent(c ? std::optional<double>(c->number()) : std::nullopt);
        }
        r.finish();
        return out;
    } catch (const InvalidArgument& e) {
        throw ConfigError(r.path(), e.what());
    }
}

// ---------------------------------------------------------------- drift pieces

Json to_json(const ScalarFn& f) {
    Json j;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SignedPower>) {
                j = {{"type", "signed_power"}, {"a", s.a}, {"alpha", s.alpha}};
            } else if constexpr (std::is_same_v<T, OddPolyNeg>) {
                j = {{"type", "odd_poly_neg"}, {"degree", s.degree}};
            } else {
                j = {{"type", "decreasing_table"}, {"x", s.x}, {"y", s.y}};
            }
        },
        f.form);
    return j;
}

ScalarFn scalar_fn_from_json(JsonReader r) {
    r.expect_object();
    const std::string type = r.at("type").string();
    ScalarFn f;
    if (type == "signed_power") {
        f.form = SignedPower{r.number_or("a", 1.0), r.at("alpha").number()};
    } else if (type == "odd_poly_neg") {
        auto dr = r.at("degree");
        const double deg = dr.number();
        if (deg != std::floor(deg) || deg < 1 || deg > 99) dr.fail("must be a positive odd integer");
        f.form = OddPolyNeg{static_cast<int>(deg)};
    } else if (type == "decreasing_table") {
        f.form = DecreasingTable{r.at("x").numbers(), r.at("y").numbers()};
    } else {
        throw ConfigError(r.path() + ".type", "unknown scalar function '" + type + "'");
    }
    r.finish();
    try {
        f.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(r.path(), e.what());
    }
    return f;
}

Json to_json(const PsiFunction& psi) {
    switch (psi.kind) {
        case PsiFunction::Kind::linear: return {{"kind", "linear"}, {"weights", psi.weights}};
        case PsiFunction::Kind::norm: return {{"kind", "norm"}};
        case PsiFunction::Kind::tanh: return {{"kind", "tanh"}, {"coordinate", psi.coordinate}};
        case PsiFunction::Kind::custom: break;
    }
    throw InvalidArgument("psi: custom test functions cannot be serialized");
}

PsiFunction psi_from_json(JsonReader r) {
    r.expect_object();
    const std::string kind = r.at("kind").string();
    PsiFunction psi;
    if (kind == "linear") {
        psi.kind = PsiFunction::Kind::linear;
        psi.weights = r.at("weights").numbers();
    } else if (kind == "norm") {
        psi.kind = PsiFunction::Kind::norm;
    } else if (kind == "tanh") {
        psi.kind = PsiFunction::Kind::tanh;
        psi.coordinate = r.uint_or("coordinate", 0);
    } else {
        throw ConfigError(r.path() + ".kind", "unknown test function '" + kind + "'");
    }
    r.finish();
    return psi;
}

Json to_json(const MeasureMap& g) {
    Json j;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, MeanMap>) {
                j = {{"type", "mean"}};
            } else if constexpr (std::is_same_v<T, MomentPowerMap>) {
                j = {{"type", "moment_power"}, {"beta", s.beta}};
            } else {
                j = {{"type", "psi_integral"}, {"psi", to_json(s.psi)}};
            }
        },
        g.form);
    return j;
}

MeasureMap measure_map_from_json(JsonReader r) {
    r.expect_object();
    const std::string type = r.at("type").string();
    MeasureMap g;
    if (type == "mean") {
        g.form = MeanMap{};
    } else if (type == "moment_power") {
        g.form = MomentPowerMap{r.at("beta").number()};
    } else if (type == "psi_integral") {
        g.form = PsiIntegralMap{psi_from_json(r.at("psi"))};
    } else {
        throw ConfigError(r.path() + ".type", "unknown measure functional '" + type + "'");
    }
    r.finish();
    return g;
}

// ---------------------------------------------------------------- model

Json to_json(const ModelSpec& model) {
    Json j;
    j["m"] = model.m;
    j["d"] = model.d;
    if (!model.u.empty()) {
        Json rows = Json::array();
        for (std::size_t r = 0; r < model.m; ++r)
            rows.push_back(std::vector<double>(model.u.begin() + static_cast<std::ptrdiff_t>(r * model.m),
                                               model.u.begin() + static_cast<std::ptrdiff_t>((r + 1) * model.m)));
        j["u"] = rows;
    }
    Json drift;
    drift["kappa"] = to_json(model.kappa);
    drift["linear_eta"] = to_json(model.linear_eta);
    drift["nonlinear_terms"] = Json::array();
    for (const auto& t : model.nonlinear_terms) {
        Json f = Json::array();
        for (const auto& s : t.f) f.push_back(to_json(s));
        drift["nonlinear_terms"].push_back({{"eta", to_json(t.eta)}, {"f", f}});
    }
    drift["measure_terms"] = Json::array();
    for (const auto& t : model.measure_terms)
        drift["measure_terms"].push_back({{"lambda", to_json(t.lambda)}, {"g", to_json(t.g)}});
    j["drift"] = drift;
    Json diff = Json::array();
    for (const auto& row : model.diffusion) {
        Json terms = Json::array();
        for (const auto& t : row.terms) terms.push_back({{"eta", to_json(t.eta)}, {"alpha", t.alpha}});
        diff.push_back({{"eta0", to_json(row.eta0)}, {"terms", terms}});
    }
    j["diffusion"] = diff;
    return j;
}

ModelSpec model_from_json(JsonReader r) {
    r.expect_object();
    const auto m = static_cast<std::size_t>(r.at("m").uint());
    const auto d = static_cast<std::size_t>(r.uint_or("d", 1));
    if (m == 0 || m > 64) throw ConfigError(r.path() + ".m", "must lie in [1, 64]");
    if (d == 0 || d > 64) throw ConfigError(r.path() + ".d", "must lie in [1, 64]");
    ModelSpec model = ModelSpec::zero(m, d);
    if (auto ur = r.find("u")) {
        if (ur->size() != m) ur->fail("expected " + std::to_string(m) + " rows");
        for (std::size_t i = 0; i < m; ++i) {
            auto row = ur->element(i).numbers();
            if (row.size() != m) ur->element(i).fail("expected " + std::to_string(m) + " entries");
            model.u.insert(model.u.end(), row.begin(), row.end());
        }
    }
    if (auto dr = r.find("drift")) {
        if (auto k = dr->find("kappa")) model.kappa = coefficient_from_json(*k);
        if (auto k = dr->find("linear_eta")) model.linear_eta = coefficient_from_json(*k);
        if (auto nr = dr->find("nonlinear_terms")) {
            for (std::size_t n = 0; n < nr->size(); ++n) {
                auto tr = nr->element(n);
                tr.expect_object();
                NonlinearTerm t;
                t.eta = coefficient_from_json(tr.at("eta"));
                auto fr = tr.at("f");
                if (fr.raw().is_object()) {
                    // One function shared by every coordinate.
                    const auto f = scalar_fn_from_json(fr);
                    t.f.assign(m, f);
                } else {
                    for (std::size_t i = 0; i < fr.size(); ++i) t.f.push_back(scalar_fn_from_json(fr.element(i)));
                }
                tr.finish();
                model.nonlinear_terms.push_back(std::move(t));
            }
        }
        if (auto mr = dr->find("measure_terms")) {
            for (std::size_t k = 0; k < mr->size(); ++k) {
                auto tr = mr->element(k);
                tr.expect_object();
                MeasureTerm t;
                t.lambda = coefficient_from_json(tr.at("lambda"));
                t.g = measure_map_from_json(tr.at("g"));
                tr.finish();
                model.measure_terms.push_back(std::move(t));
            }
        }
        dr->finish();
    }
    if (auto dr = r.find("diffusion")) {
        model.diffusion.clear();
        for (std::size_t i = 0; i < dr->size(); ++i) {
            auto rr = dr->element(i);
            rr.expect_object();
            DiffusionRow row;
            row.eta0 = rr.has("eta0") ? coefficient_from_json(rr.at("eta0")) : CoefficientFn::zero(d);
            if (auto tr = rr.find("terms")) {
                for (std::size_t k = 0; k < tr->size(); ++k) {
                    auto er = tr->element(k);
                    er.expect_object();
                    DiffusionTerm t;
                    t.eta = coefficient_from_json(er.at("eta"));
                    t.alpha = er.at("alpha").number();
                    er.finish();
                    row.terms.push_back(std::move(t));
                }
            }
            rr.finish();
            model.diffusion.push_back(std::move(row));
        }
    }
    r.finish();
    try {
        model.validate();
    } catch (const InvalidArgument& e) {
        rethrow_at(e, "model", r.path());
    }
    return model;
}

// ---------------------------------------------------------------- simulation

Json to_json(const SimConfig& cfg) {
    return {{"t0", cfg.t0},
            {"T", cfg.T},
            {"dt", cfg.dt},
            {"N", cfg.N},
            {"seed", std::to_string(cfg.seed)},
            {"scheme", cfg.scheme},
            {"record_every", cfg.record_every},
            {"root_policy", cfg.root_policy == RootPolicy::absorb ? "absorb" : "none"}};
}

SimConfig sim_config_from_json(JsonReader r) {
    r.expect_object();
    SimConfig cfg;
    cfg.t0 = r.number_or("t0", cfg.t0);
    cfg.T = r.number_or("T", cfg.T);
    cfg.dt = r.number_or("dt", cfg.dt);
    cfg.N = static_cast<std::size_t>(r.uint_or("N", cfg.N));
    cfg.seed = r.uint_or("seed", cfg.seed);
    cfg.scheme = r.string_or("scheme", cfg.scheme);
    cfg.record_every = static_cast<std::size_t>(r.uint_or("record_every", cfg.record_every));
    const auto policy = r.string_or("root_policy", "absorb");
    if (policy == "absorb") {
        cfg.root_policy = RootPolicy::absorb;
    } else if (policy == "none") {
        cfg.root_policy = RootPolicy::none;
    } else {
        throw ConfigError(r.path() + ".root_policy", "expected \"absorb\" or \"none\"");
    }
    // Thread count is a run-time flag, never part of the reproducible configuration.
    r.finish();
    try {
        cfg.validate();
    } catch (const InvalidArgument& e) {
        rethrow_at(e, "sim", r.path());
    }
    return cfg;
}

Json to_json(const InitialSampler& xi) {
    switch (xi.kind) {
        case InitialSampler::Kind::constant: return {{"kind", "constant"}, {"value", xi.a}};
        case InitialSampler::Kind::normal: return {{"kind", "normal"}, {"mean", xi.a}, {"std", xi.b}};
        case InitialSampler::Kind::uniform: return {{"kind", "uniform"}, {"low", xi.a}, {"high", xi.b}};
        case InitialSampler::Kind::points: return {{"kind", "points"}, {"points", xi.points}};
    }
    return {};
}

InitialSampler sampler_from_json(JsonReader r) {
    if (r.raw().is_number() || (r.raw().is_array() && !r.raw().empty() && r.raw()[0].is_number())) {
        return InitialSampler::constant(r.raw().is_number() ? std::vector<double>{r.number()} : r.numbers());
    }
    r.expect_object();
    const std::string kind = r.at("kind").string();
    InitialSampler xi;
    if (kind == "constant") {
        xi = InitialSampler::constant(r.at("value").numbers());
    } else if (kind == "normal") {
        xi.kind = InitialSampler::Kind::normal;
        xi.a = r.at("mean").numbers();
        xi.b = r.at("std").numbers();
    } else if (kind == "uniform") {
        xi.kind = InitialSampler::Kind::uniform;
        xi.a = r.at("low").numbers();
        xi.b = r.at("high").numbers();
    } else if (kind == "points") {
        xi.kind = InitialSampler::Kind::points;
        xi.points = r.at("points").numbers();
    } else {
        throw ConfigError(r.path() + ".kind", "unknown initial law '" + kind + "'");
    }
    r.finish();
    return xi;
}

// ---------------------------------------------------------------- coefficient specs

Json to_json(const HolderTermSpec& spec) {
    Json terms = Json::array();
    for (std::size_t k = 0; k < spec.l(); ++k)
        terms.push_back({{"alpha", spec.alpha[k]},
                         {"beta", spec.beta[k]},
                         {"eta", to_json(spec.eta[k])},
                         {"lambda", to_json(spec.lambda[k])}});
    return {{"terms", terms},
            {"epsilon", to_json(spec.epsilon)},
            {"c0_zeta0", to_json(spec.c0_zeta0)},
            {"c_P", spec.c_P}};
}

HolderTermSpec holder_spec_from_json(JsonReader r) {
    r.expect_object();
    HolderTermSpec spec;
    auto tr = r.at("terms");
    for (std::size_t k = 0; k < tr.size(); ++k) {
        auto e = tr.element(k);
        e.expect_object();
        auto ar = e.at("alpha");
        const double a = ar.number();
        if (!(a > 0.0 && a <= 1.0)) ar.fail("must lie in (0, 1], got " + ar.raw().dump());
        auto br = e.find("beta");
        const double b = br ? br->number() : 1.0;
        if (br && !(b > 0.0 && b <= 1.0)) br->fail("must lie in (0, 1], got " + br->raw().dump());
        spec.alpha.push_back(a);
        spec.beta.push_back(b);
        spec.eta.push_back(coefficient_from_json(e.at("eta")));
        const std::size_t m = spec.eta.back().rows();
        spec.lambda.push_back(e.has("lambda") ? coefficient_from_json(e.at("lambda")) : CoefficientFn::zero(m));
        e.finish();
    }
    spec.epsilon = r.has("epsilon") ? coefficient_from_json(r.at("epsilon")) : CoefficientFn::constant(0.0);
    spec.c0_zeta0 = r.has("c0_zeta0") ? coefficient_from_json(r.at("c0_zeta0")) : CoefficientFn::constant(0.0);
    spec.c_P = r.number_or("c_P", 1.0);
    r.finish();
    try {
        spec.validate();
    } catch (const InvalidArgument& e) {
        rethrow_at(e, "holder_spec", r.path());
    }
    return spec;
}

// ---------------------------------------------------------------- hashing

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw NumericalError("sha256: digest failed");
    std::string hex;
    hex.reserve(2 * len);
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string model_fingerprint(const ModelSpec& model) {
    try {
        return sha256_hex(to_json(model).dump());
    } catch (const InvalidArgument&) {
        // Models holding custom callables have no canonical form.
        return "unserializable";
    }
}

}  // namespace mkvlab
