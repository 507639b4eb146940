#include "fockfit/io.hpp"

#include "json.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace fockfit::io {

using nlohmann::json;

namespace {

json parse(std::string_view text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("malformed JSON: ") + e.what());
    }
}

const json& field(const json& obj, const std::string& key, const std::string& path)
{
    if (!obj.is_object())
        throw FormatError(path + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        throw FormatError(path + "." + key + ": missing required field");
    return *it;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& path)
{
    if (!obj.is_object())
        throw FormatError(path + ": expected an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.contains(key))
            throw FormatError(path + "." + key + ": unknown field");
}

double as_number(const json& v, const std::string& path)
{
    if (!v.is_number())
        throw FormatError(path + ": expected a number");
    return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& path)
{
    if (!v.is_number_integer())
        throw FormatError(path + ": expected an integer");
    return v.get<std::int64_t>();
}

std::uint64_t as_unsigned(const json& v, const std::string& path)
{
    if (v.is_number_unsigned())
        return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw FormatError(path + ": expected a nonnegative integer");
}

bool as_bool(const json& v, const std::string& path)
{
    if (!v.is_boolean())
        throw FormatError(path + ": expected true or false");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path)
{
    if (!v.is_string())
        throw FormatError(path + ": expected a string");
    return v.get<std::string>();
}

const json& as_array(const json& v, const std::string& path)
{
    if (!v.is_array())
        throw FormatError(path + ": expected an array");
    return v;
}

void check_version(const json& obj, const std::string& path)
{
    const std::int64_t version = as_integer(field(obj, "format_version", path),
                                            path + ".format_version");
    if (version != kFormatVersion)
        throw FormatError(path + ".format_version: unsupported version " +
                          std::to_string(version));
}

// Rethrow domain validation failures as schema errors attributed to `path`.
template <typename F>
auto validated(const std::string& path, F&& f)
{
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw FormatError(path + ": " + e.what());
    }
}

} // namespace

std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string counts_to_json(const FockHistogram& h)
{
    require_valid(h);
    json j;
    j["format_version"] = kFormatVersion;
    j["n_max"] = h.n_max;
    j["counts"] = h.counts;
    j["overflow"] = h.overflow_count;
    j["total"] = h.total;
    return j.dump(2) + "\n";
}

FockHistogram counts_from_json(std::string_view text)
{
    const json j = parse(text);
    const std::string root = "counts";
    reject_unknown(j, {"format_version", "n_max", "counts", "overflow", "total"}, root);
    check_version(j, root);
    FockHistogram h;
    h.n_max = static_cast<int>(as_integer(field(j, "n_max", root), root + ".n_max"));
    const json& counts = as_array(field(j, "counts", root), root + ".counts");
    for (std::size_t i = 0; i < counts.size(); ++i)
        h.counts.push_back(as_integer(counts[i], root + ".counts[" + std::to_string(i) + "]"));
    h.overflow_count = as_integer(field(j, "overflow", root), root + ".overflow");
    h.total = as_integer(field(j, "total", root), root + ".total");
    validated(root, [&] {
        require_valid(h);
        return 0;
    });
    return h;
}

namespace {

json interval_to_json(const ConfidenceInterval& ci)
{
    return {{"parameter", std::string(to_string(ci.parameter))},
            {"method", std::string(to_string(ci.method))},
            {"level", ci.level},
            {"lower", ci.lower},
            {"upper", ci.upper}};
}

ConfidenceInterval interval_from_json(const json& j, const std::string& path)
{
    reject_unknown(j, {"parameter", "method", "level", "lower", "upper"}, path);
    ConfidenceInterval ci;
    validated(path, [&] {
        ci.parameter = parameter_from_string(as_string(field(j, "parameter", path),
                                                       path + ".parameter"));
        ci.method = interval_method_from_string(as_string(field(j, "method", path),
                                                          path + ".method"));
        return 0;
    });
    ci.level = as_number(field(j, "level", path), path + ".level");
    ci.lower = as_number(field(j, "lower", path), path + ".lower");
    ci.upper = as_number(field(j, "upper", path), path + ".upper");
    if (!(ci.lower <= ci.upper) || !(ci.level > 0.0 && ci.level < 1.0))
        throw FormatError(path + ": need lower <= upper and 0 < level < 1");
    return ci;
}

} // namespace

std::string estimate_to_json(const Estimate& e)
{
    json j;
    j["format_version"] = kFormatVersion;
    j["vq"] = e.fit.variances.vq;
    j["vp"] = e.fit.variances.vp;
    j["r"] = e.fit.state.r;
    j["nbar"] = e.fit.state.nbar;
    j["objective"] = e.fit.objective;
    j["converged"] = e.fit.converged;
    j["evaluations"] = e.fit.evaluations;
    j["weight_scheme"] = std::string(to_string(e.weight_scheme));
    j["prior"] = {{"nu", e.prior.nu}, {"eta", e.prior.eta}};
    if (e.n_b)
        j["n_b"] = *e.n_b;
    if (e.seed)
        j["seed"] = *e.seed;
    json intervals = json::array();
    for (const auto& ci : e.intervals)
        intervals.push_back(interval_to_json(ci));
    j["intervals"] = intervals;
    return j.dump(2) + "\n";
}

Estimate estimate_from_json(std::string_view text)
{
    const json j = parse(text);
    const std::string root = "estimate";
    reject_unknown(j, {"format_version", "vq", "vp", "r", "nbar", "objective", "converged",
                       "evaluations", "weight_scheme", "prior", "n_b", "seed", "intervals"},
                   root);
    check_version(j, root);
    Estimate e;
    e.fit.variances.vq = as_number(field(j, "vq", root), root + ".vq");
    e.fit.variances.vp = as_number(field(j, "vp", root), root + ".vp");
    e.fit.state.r = as_number(field(j, "r", root), root + ".r");
    e.fit.state.nbar = as_number(field(j, "nbar", root), root + ".nbar");
    e.fit.objective = as_number(field(j, "objective", root), root + ".objective");
    e.fit.converged = as_bool(field(j, "converged", root), root + ".converged");
    if (j.contains("evaluations"))
        e.fit.evaluations = static_cast<int>(as_integer(j["evaluations"], root + ".evaluations"));
    if (j.contains("weight_scheme"))
        e.weight_scheme = validated(root + ".weight_scheme", [&] {
            return weight_scheme_from_string(as_string(j["weight_scheme"], root + ".weight_scheme"));
        });
    if (j.contains("prior")) {
        const json& p = j["prior"];
        reject_unknown(p, {"nu", "eta"}, root + ".prior");
        e.prior.nu = as_number(field(p, "nu", root + ".prior"), root + ".prior.nu");
        e.prior.eta = as_number(field(p, "eta", root + ".prior"), root + ".prior.eta");
    }
    if (j.contains("n_b"))
        e.n_b = static_cast<int>(as_integer(j["n_b"], root + ".n_b"));
    if (j.contains("seed"))
        e.seed = as_unsigned(j["seed"], root + ".seed");
    if (j.contains("intervals")) {
        const json& list = as_array(j["intervals"], root + ".intervals");
        for (std::size_t i = 0; i < list.size(); ++i)
            e.intervals.push_back(
                interval_from_json(list[i], root + ".intervals[" + std::to_string(i) + "]"));
    }
    validated(root, [&] {
        require_valid(e.fit.variances);
        return 0;
    });
    return e;
}

std::string_view to_string(StudyKind kind)
{
    switch (kind) {
    case StudyKind::fidelity: return "fidelity";
    case StudyKind::bias: return "bias";
    case StudyKind::coverage: return "coverage";
    case StudyKind::weights: return "weights";
    }
    return "fidelity";
}

namespace {

SqueezedThermalState state_from_json(const json& j, const std::string& path)
{
    reject_unknown(j, {"r", "nbar", "vq", "vp"}, path);
    const bool physical = j.contains("r") || j.contains("nbar");
    const bool variances = j.contains("vq") || j.contains("vp");
    if (physical == variances)
        throw FormatError(path + ": give either {r, nbar} or {vq, vp}");
    if (physical) {
        SqueezedThermalState s{as_number(field(j, "r", path), path + ".r"),
                               as_number(field(j, "nbar", path), path + ".nbar")};
        validated(path, [&] {
            require_valid(s);
            return 0;
        });
        return s;
    }
    const QuadratureVariances v{as_number(field(j, "vq", path), path + ".vq"),
                                as_number(field(j, "vp", path), path + ".vp")};
    return validated(path, [&] { return from_variances(v); });
}

PriorShape prior_from_json(const json& j, const std::string& path)
{
    reject_unknown(j, {"nu", "eta"}, path);
    PriorShape p{as_number(field(j, "nu", path), path + ".nu"),
                 as_number(field(j, "eta", path), path + ".eta")};
    validated(path, [&] {
        require_valid(p);
        return 0;
    });
    return p;
}

} // namespace

StudyRequest study_request_from_json(std::string_view text)
{
    const json j = parse(text);
    const std::string root = "config";
    reject_unknown(j, {"format_version", "study", "true_states", "shot_counts", "n_experiments",
                       "n_b", "alpha", "prior", "weight_scheme", "schemes", "methods", "n_max",
                       "master_seed", "exact"},
                   root);
    check_version(j, root);

    StudyRequest req;
    const std::string kind = as_string(field(j, "study", root), root + ".study");
    if (kind == "fidelity") req.kind = StudyKind::fidelity;
    else if (kind == "bias") req.kind = StudyKind::bias;
    else if (kind == "coverage") req.kind = StudyKind::coverage;
    else if (kind == "weights") req.kind = StudyKind::weights;
    else
        throw FormatError(root + ".study: unknown study '" + kind +
                          "' (expected fidelity, bias, coverage or weights)");

    StudyConfig& cfg = req.config;
    const json& states = as_array(field(j, "true_states", root), root + ".true_states");
    for (std::size_t i = 0; i < states.size(); ++i)
        cfg.true_states.push_back(
            state_from_json(states[i], root + ".true_states[" + std::to_string(i) + "]"));

    if (j.contains("shot_counts")) {
        const json& shots = as_array(j["shot_counts"], root + ".shot_counts");
        for (std::size_t i = 0; i < shots.size(); ++i)
            cfg.shot_counts.push_back(
                as_integer(shots[i], root + ".shot_counts[" + std::to_string(i) + "]"));
    } else {
        cfg.shot_counts = default_shot_grid();
    }
    if (j.contains("n_experiments"))
        cfg.n_experiments = static_cast<int>(as_integer(j["n_experiments"], root + ".n_experiments"));
    if (j.contains("n_b")) {
        cfg.n_b.clear();
        const json& nb = j["n_b"];
        if (nb.is_array()) {
            for (std::size_t i = 0; i < nb.size(); ++i)
                cfg.n_b.push_back(static_cast<int>(
                    as_integer(nb[i], root + ".n_b[" + std::to_string(i) + "]")));
        } else {
            cfg.n_b.push_back(static_cast<int>(as_integer(nb, root + ".n_b")));
        }
    }
    if (j.contains("alpha"))
        cfg.alpha = as_number(j["alpha"], root + ".alpha");
    if (j.contains("prior"))
        cfg.prior = prior_from_json(j["prior"], root + ".prior");
    if (j.contains("weight_scheme"))
        cfg.weight_scheme = validated(root + ".weight_scheme", [&] {
            return weight_scheme_from_string(as_string(j["weight_scheme"], root + ".weight_scheme"));
        });
    if (j.contains("schemes")) {
        const json& list = as_array(j["schemes"], root + ".schemes");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string path = root + ".schemes[" + std::to_string(i) + "]";
            reject_unknown(list[i], {"scheme", "nu", "eta"}, path);
            SchemeSpec spec;
            spec.scheme = validated(path + ".scheme", [&] {
                return weight_scheme_from_string(as_string(field(list[i], "scheme", path),
                                                           path + ".scheme"));
            });
            if (list[i].contains("nu"))
                spec.prior.nu = as_number(list[i]["nu"], path + ".nu");
            if (list[i].contains("eta"))
                spec.prior.eta = as_number(list[i]["eta"], path + ".eta");
            cfg.schemes.push_back(spec);
        }
    }
    if (j.contains("methods")) {
        cfg.methods.clear();
        const json& list = as_array(j["methods"], root + ".methods");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string path = root + ".methods[" + std::to_string(i) + "]";
            cfg.methods.push_back(validated(path, [&] {
                return interval_method_from_string(as_string(list[i], path));
            }));
        }
    }
    if (j.contains("n_max"))
        cfg.n_max = static_cast<int>(as_integer(j["n_max"], root + ".n_max"));
    if (j.contains("master_seed"))
        cfg.master_seed = as_unsigned(j["master_seed"], root + ".master_seed");
    if (j.contains("exact"))
        cfg.exact = as_bool(j["exact"], root + ".exact");

    validated(root, [&] {
        require_valid(cfg);
        return 0;
    });
    if (req.kind == StudyKind::weights && cfg.schemes.size() < 2)
        throw FormatError(root + ".schemes: a weights study needs at least two schemes");
    return req;
}

namespace {

// Report order of the per-parameter statistic columns.
constexpr std::array<Parameter, 4> kBiasOrder{Parameter::r, Parameter::vp, Parameter::vq,
                                              Parameter::nbar};
constexpr std::array<Parameter, 4> kCoverageOrder{Parameter::vq, Parameter::vp, Parameter::r,
                                                  Parameter::nbar};

} // namespace

std::vector<std::string> report_csv_columns()
{
    std::vector<std::string> cols{"state_r",        "state_nbar",     "shots",
                                  "scheme",         "nu",             "eta",
                                  "n_experiments",  "n_failed",       "mean_fidelity",
                                  "std_fidelity",   "mean_infidelity", "std_infidelity"};
    for (Parameter p : kBiasOrder) {
        const std::string name(to_string(p));
        cols.push_back("bias_" + name);
        cols.push_back("std_" + name);
        cols.push_back("bias_over_std_" + name);
    }
    for (Parameter p : kCoverageOrder) {
        const std::string name(to_string(p));
        cols.push_back("coverage_" + name);
        cols.push_back("se_coverage_" + name);
    }
    cols.push_back("method");
    cols.push_back("n_b");
    return cols;
}

std::string report_to_csv(const StudyReport& report)
{
    std::ostringstream out;
    const auto cols = report_csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    out << "\n";
    for (const auto& row : report.rows) {
        out << format_double(row.state.r) << ',' << format_double(row.state.nbar) << ','
            << row.shots << ',' << to_string(row.scheme.scheme) << ','
            << format_double(row.scheme.prior.nu) << ',' << format_double(row.scheme.prior.eta)
            << ',' << row.n_experiments << ',' << row.n_failed << ','
            << format_double(row.mean_fidelity) << ',' << format_double(row.std_fidelity) << ','
            << format_double(row.mean_infidelity) << ',' << format_double(row.std_infidelity);
        for (Parameter p : kBiasOrder) {
            const ParameterStats& s = row[p];
            out << ',' << format_double(s.bias) << ',' << format_double(s.std_dev) << ','
                << format_double(s.bias_over_std);
        }
        for (Parameter p : kCoverageOrder) {
            if (row.method) {
                const CoverageEntry& c = row.coverage[static_cast<std::size_t>(p)];
                out << ',' << format_double(c.fraction) << ',' << format_double(c.standard_error);
            } else {
                out << ",,";
            }
        }
        if (row.method)
            out << ',' << to_string(*row.method) << ',' << row.n_b;
        else
            out << ",,";
        out << "\n";
    }
    return out.str();
}

std::string report_to_json(const StudyReport& report, StudyKind kind)
{
    json rows = json::array();
    for (const auto& row : report.rows) {
        json r;
        r["state"] = {{"r", row.state.r}, {"nbar", row.state.nbar}};
        r["shots"] = row.shots;
        r["scheme"] = std::string(to_string(row.scheme.scheme));
        r["prior"] = {{"nu", row.scheme.prior.nu}, {"eta", row.scheme.prior.eta}};
        r["n_experiments"] = row.n_experiments;
        r["n_failed"] = row.n_failed;
        r["mean_fidelity"] = row.mean_fidelity;
        r["std_fidelity"] = row.std_fidelity;
        r["mean_infidelity"] = row.mean_infidelity;
        r["std_infidelity"] = row.std_infidelity;
        json params = json::object();
        for (Parameter p : kAllParameters) {
            const ParameterStats& s = row[p];
            params[std::string(to_string(p))] = {{"truth", s.truth},
                                                 {"mean", s.mean},
                                                 {"bias", s.bias},
                                                 {"std", s.std_dev},
                                                 {"bias_over_std", s.bias_over_std}};
        }
        r["parameters"] = params;
        if (row.method) {
            r["method"] = std::string(to_string(*row.method));
            r["n_b"] = row.n_b;
            json cov = json::object();
            for (Parameter p : kAllParameters) {
                const CoverageEntry& c = row.coverage[static_cast<std::size_t>(p)];
                cov[std::string(to_string(p))] = {{"fraction", c.fraction},
                                                  {"standard_error", c.standard_error}};
            }
            r["coverage"] = cov;
        }
        rows.push_back(r);
    }
    json j;
    j["format_version"] = kFormatVersion;
    j["study"] = std::string(to_string(kind));
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw IoError("error while reading '" + path.string() + "'");
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    // Devices, pipes and the like are written in place; renaming over them would replace them.
    std::error_code status_ec;
    const auto status = std::filesystem::status(path, status_ec);
    if (std::filesystem::exists(status) && !std::filesystem::is_regular_file(status)) {
        std::ofstream out(path, std::ios::binary);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out)
            throw IoError("error while writing '" + path.string() + "'");
        return;
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("error while writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path.string() + "'");
    }
}

} // namespace fockfit::io
