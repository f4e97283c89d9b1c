#include "rvr/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rvr/error.hpp"
#include "rvr/format.hpp"

namespace rvr {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"data", {"source", "csv_path", "assets"}},
        {"gbm", {"initial_prices", "drifts", "volatilities", "correlation", "steps", "seed", "start_timestamp",
                 "step_seconds"}},
        {"run", {"initial_value_usd", "out_dir"}},
        {"strategy", {"kind", "base_weights", "memory_days", "k", "min_weight", "rebalance_interval",
                      "interpolation_steps"}},
        {"amm", {"fee_bps", "gas_usd", "discovery_delay_steps", "noise_multiplier"}},
        {"cex", {"tau_bps", "spreads_bps"}},
        {"sweep", {"memory_days", "k", "fee_bps", "gas_usd", "tau_cex_bps", "nu", "flush_every",
                   "write_cell_series"}},
        {"cube", {"memory_days", "k", "fee_bps", "gas_usd", "tau_cex_bps", "nu"}},
    };
    return keys;
}

std::string key_of(const std::string& section, const std::string& key) { return section + "." + key; }

std::vector<double> number_list(const std::string& text, const std::string& where) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    for (auto field : split(text, ',')) {
        try {
            out.push_back(parse_double(field));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    return out;
}

std::vector<std::string> string_list(const std::string& text) {
    std::vector<std::string> out;
    if (trim(text).empty()) return out;
    for (auto field : split(text, ',')) out.emplace_back(trim(field));
    return out;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> raw(const std::string& section, const std::string& key) const {
        const auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        const auto v = sec->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return std::string(trim(*v));
    }
    bool has_section(const std::string& section) const { return tree_.get_child_optional(section).has_value(); }

    double number(const std::string& s, const std::string& k, std::optional<double> fallback = {}) const {
        const auto v = raw(s, k);
        if (!v) {
            if (fallback) return *fallback;
            throw ConfigError("missing required key " + key_of(s, k));
        }
        try {
            return parse_double(*v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(key_of(s, k) + ": " + e.what());
        }
    }
    std::int64_t integer(const std::string& s, const std::string& k, std::optional<std::int64_t> fallback = {}) const {
        const auto v = raw(s, k);
        if (!v) {
            if (fallback) return *fallback;
            throw ConfigError("missing required key " + key_of(s, k));
        }
        try {
            return parse_int64(*v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(key_of(s, k) + ": " + e.what());
        }
    }
    std::size_t count(const std::string& s, const std::string& k, std::optional<std::size_t> fallback = {}) const {
        const auto v = integer(s, k, fallback ? std::optional<std::int64_t>(static_cast<std::int64_t>(*fallback))
                                              : std::nullopt);
        if (v < 0) throw ConfigError(key_of(s, k) + " must be non-negative");
        return static_cast<std::size_t>(v);
    }
    std::vector<double> numbers(const std::string& s, const std::string& k) const {
        const auto v = raw(s, k);
        if (!v) throw ConfigError("missing required key " + key_of(s, k));
        auto out = number_list(*v, key_of(s, k));
        if (out.empty()) throw ConfigError(key_of(s, k) + " is empty");
        return out;
    }
    std::vector<double> axis(const std::string& s, const std::string& k, double fallback) const {
        const auto v = raw(s, k);
        if (!v) return {fallback};
        if (v->empty()) throw ConfigError(key_of(s, k) + ": empty axis list");
        try {
            return parse_axis(*v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(key_of(s, k) + ": " + e.what());
        }
    }

private:
    const pt::ptree& tree_;
};

SweepAxes read_axes(const Reader& r, const std::string& section, const RunConfig& c) {
    SweepAxes a;
    a.memory_days = r.axis(section, "memory_days", c.strategy.memory_days);
    a.k = r.axis(section, "k", c.strategy.aggressiveness);
    a.fee_bps = r.axis(section, "fee_bps", c.fee_bps);
    a.gas_usd = r.axis(section, "gas_usd", c.arb.gas_cost_usd);
    a.tau_cex_bps = r.axis(section, "tau_cex_bps", c.tau_cex_bps);
    a.nu = r.axis(section, "nu", c.arb.noise_multiplier);
    return a;
}

void write_axes(std::ostream& out, const char* section, const SweepAxes& a) {
    out << '[' << section << "]\n";
    out << "memory_days = " << format_list(a.memory_days) << '\n';
    out << "k = " << format_list(a.k) << '\n';
    out << "fee_bps = " << format_list(a.fee_bps) << '\n';
    out << "gas_usd = " << format_list(a.gas_usd) << '\n';
    out << "tau_cex_bps = " << format_list(a.tau_cex_bps) << '\n';
    out << "nu = " << format_list(a.nu) << '\n';
}

}  // namespace

std::vector<double> parse_axis(const std::string& text) {
    const auto body = trim(text);
    for (const char* fn : {"linspace", "geomspace"}) {
        const std::string prefix = std::string(fn) + "(";
        if (body.substr(0, prefix.size()) != prefix) continue;
        if (body.back() != ')') throw std::invalid_argument("unterminated " + std::string(fn) + "(...)");
        const auto args = split(body.substr(prefix.size(), body.size() - prefix.size() - 1), ',');
        if (args.size() != 3) throw std::invalid_argument(std::string(fn) + " takes (start, stop, count)");
        const double a = parse_double(args[0]);
        const double b = parse_double(args[1]);
        const auto n = parse_int64(args[2]);
        if (n < 1) throw std::invalid_argument(std::string(fn) + " count must be >= 1");
        const bool geometric = std::string(fn) == "geomspace";
        if (geometric && !(a > 0.0 && b > 0.0)) throw std::invalid_argument("geomspace bounds must be positive");
        std::vector<double> out(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) {
            const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
            out[static_cast<std::size_t>(i)] =
                geometric ? std::exp(std::log(a) + f * (std::log(b) - std::log(a))) : a + f * (b - a);
        }
        out.back() = n == 1 ? a : b;
        return out;
    }
    std::vector<double> out;
    for (auto field : split(body, ',')) out.push_back(parse_double(field));
    return out;
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir,
                       const std::vector<std::string>& overrides) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        const auto dot = o.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
            throw ConfigError("override must look like section.key=value: '" + o + "'");
        }
        tree.put(std::string(trim(o.substr(0, eq))), std::string(trim(o.substr(eq + 1))));
    }
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) throw ConfigError("config: unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            if (!it->second.contains(key)) throw ConfigError("config: unknown key " + key_of(section, key));
        }
    }

    const Reader r(tree);
    RunConfig c;

    const auto source = r.raw("data", "source").value_or("gbm");
    if (const auto assets = r.raw("data", "assets")) c.assets = string_list(*assets);
    if (source == "csv") {
        c.source = DataSource::csv;
        const auto path = r.raw("data", "csv_path");
        if (!path || path->empty()) throw ConfigError("data.source = csv requires data.csv_path");
        if (r.has_section("gbm")) throw ConfigError("config: data.source = csv but a [gbm] section is present");
        std::filesystem::path p(*path);
        if (p.is_relative()) p = base_dir / p;
        c.csv_path = std::filesystem::weakly_canonical(p);
        if (!std::filesystem::exists(c.csv_path)) {
            throw ConfigError("data.csv_path does not exist: " + c.csv_path.string());
        }
    } else if (source == "gbm") {
        c.source = DataSource::gbm;
        if (r.raw("data", "csv_path")) throw ConfigError("config: data.source = gbm but data.csv_path is set");
        if (!r.has_section("gbm")) throw ConfigError("data.source = gbm requires a [gbm] section");
        auto& g = c.gbm;
        g.initial_prices = r.numbers("gbm", "initial_prices");
        const std::size_t n = g.initial_prices.size();
        g.drifts = r.raw("gbm", "drifts") ? r.numbers("gbm", "drifts") : std::vector<double>(n, 0.0);
        g.volatilities = r.numbers("gbm", "volatilities");
        if (r.raw("gbm", "correlation")) {
            g.correlation = r.numbers("gbm", "correlation");
        } else {
            g.correlation.assign(n * n, 0.0);
            for (std::size_t i = 0; i < n; ++i) g.correlation[i * n + i] = 1.0;
        }
        g.steps = r.count("gbm", "steps");
        g.seed = static_cast<std::uint64_t>(r.count("gbm", "seed", 0));
        g.start_timestamp = r.integer("gbm", "start_timestamp", 0);
        g.step_seconds = r.integer("gbm", "step_seconds", 60);
        g.asset_labels = c.assets;
        g.validate();
    } else {
        throw ConfigError("data.source must be 'csv' or 'gbm', got '" + source + "'");
    }

    c.initial_value_usd = r.number("run", "initial_value_usd", 10'000'000.0);
    if (!(c.initial_value_usd > 0.0)) throw ConfigError("run.initial_value_usd must be positive");
    if (const auto out = r.raw("run", "out_dir"); out && !out->empty()) {
        std::filesystem::path p(*out);
        c.out_dir = p.is_relative() ? base_dir / p : p;
    }

    auto& s = c.strategy;
    s.kind = parse_strategy_kind(r.raw("strategy", "kind").value_or("constant"));
    s.base_weights = r.numbers("strategy", "base_weights");
    s.memory_days = r.number("strategy", "memory_days", 1.0);
    s.aggressiveness = r.number("strategy", "k", 1.0);
    s.min_weight = r.number("strategy", "min_weight", 0.03);
    s.rebalance_interval = r.count("strategy", "rebalance_interval", 1440);
    s.interpolation_steps = r.count("strategy", "interpolation_steps", s.rebalance_interval);
    s.validate(s.base_weights.size());
    const std::size_t n = s.base_weights.size();
    if (!c.assets.empty() && c.assets.size() != n) {
        throw ConfigError("data.assets and strategy.base_weights disagree on the number of assets");
    }
    if (c.source == DataSource::gbm && c.gbm.initial_prices.size() != n) {
        throw ConfigError("gbm.initial_prices and strategy.base_weights disagree on the number of assets");
    }

    c.fee_bps = r.number("amm", "fee_bps", 0.0);
    if (!(c.fee_bps >= 0.0 && c.fee_bps < 1e4)) throw ConfigError("amm.fee_bps must be in [0, 10000)");
    c.arb.gas_cost_usd = r.number("amm", "gas_usd", 0.0);
    c.arb.discovery_delay_steps = r.count("amm", "discovery_delay_steps", 1);
    c.arb.noise_multiplier = r.number("amm", "noise_multiplier", 0.0);
    c.arb.validate();

    c.tau_cex_bps = r.number("cex", "tau_bps", 0.0);
    c.spreads_bps = r.raw("cex", "spreads_bps") ? r.numbers("cex", "spreads_bps") : std::vector<double>(n, 2.0);
    std::vector<double> spreads;
    for (double b : c.spreads_bps) spreads.push_back(b / 1e4);
    CexCostParams{c.tau_cex_bps / 1e4, spreads}.validate(n);

    if (r.has_section("sweep")) {
        c.sweep = read_axes(r, "sweep", c);
        c.flush_every = r.count("sweep", "flush_every", 100);
        const auto series = r.raw("sweep", "write_cell_series").value_or("false");
        if (series != "true" && series != "false") {
            throw ConfigError("sweep.write_cell_series must be true or false");
        }
        c.write_cell_series = series == "true";
        make_grid(c, *c.sweep).validate(n);
    }
    if (r.has_section("cube")) {
        c.cube = read_axes(r, "cube", c);
        make_grid(c, *c.cube).validate(n);
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    return parse_config(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path(), overrides);
}

void write_effective_config(std::ostream& out, const RunConfig& c) {
    std::string labels;
    for (const auto& a : c.assets) labels += (labels.empty() ? "" : ",") + a;

    out << "[data]\n";
    out << "source = " << (c.source == DataSource::csv ? "csv" : "gbm") << '\n';
    if (c.source == DataSource::csv) out << "csv_path = " << c.csv_path.string() << '\n';
    if (!labels.empty()) out << "assets = " << labels << '\n';
    if (c.source == DataSource::gbm) {
        const auto& g = c.gbm;
        out << "\n[gbm]\n";
        out << "initial_prices = " << format_list(g.initial_prices) << '\n';
        out << "drifts = " << format_list(g.drifts) << '\n';
        out << "volatilities = " << format_list(g.volatilities) << '\n';
        out << "correlation = " << format_list(g.correlation) << '\n';
        out << "steps = " << g.steps << '\n';
        out << "seed = " << g.seed << '\n';
        out << "start_timestamp = " << g.start_timestamp << '\n';
        out << "step_seconds = " << g.step_seconds << '\n';
    }
    out << "\n[run]\n";
    out << "initial_value_usd = " << format_double(c.initial_value_usd) << '\n';
    const auto& s = c.strategy;
    out << "\n[strategy]\n";
    out << "kind = " << to_string(s.kind) << '\n';
    out << "base_weights = " << format_list(s.base_weights) << '\n';
    out << "memory_days = " << format_double(s.memory_days) << '\n';
    out << "k = " << format_double(s.aggressiveness) << '\n';
    out << "min_weight = " << format_double(s.min_weight) << '\n';
    out << "rebalance_interval = " << s.rebalance_interval << '\n';
    out << "interpolation_steps = " << s.interpolation_steps << '\n';
    out << "\n[amm]\n";
    out << "fee_bps = " << format_double(c.fee_bps) << '\n';
    out << "gas_usd = " << format_double(c.arb.gas_cost_usd) << '\n';
    out << "discovery_delay_steps = " << c.arb.discovery_delay_steps << '\n';
    out << "noise_multiplier = " << format_double(c.arb.noise_multiplier) << '\n';
    out << "\n[cex]\n";
    out << "tau_bps = " << format_double(c.tau_cex_bps) << '\n';
    out << "spreads_bps = " << format_list(c.spreads_bps) << '\n';
    if (c.sweep) {
        out << '\n';
        write_axes(out, "sweep", *c.sweep);
        out << "flush_every = " << c.flush_every << '\n';
        out << "write_cell_series = " << (c.write_cell_series ? "true" : "false") << '\n';
    }
    if (c.cube) {
        out << '\n';
        write_axes(out, "cube", *c.cube);
    }
}

PriceSeries load_series(const RunConfig& c) {
    if (c.source == DataSource::csv) {
        return load_price_csv(c.csv_path, c.assets.empty() ? std::nullopt
                                                            : std::optional<std::vector<std::string>>(c.assets));
    }
    return generate_gbm(c.gbm);
}

CellConfig base_cell(const RunConfig& c) {
    CellConfig cell;
    cell.strategy = c.strategy;
    cell.gamma = 1.0 - c.fee_bps / 1e4;
    cell.arb = c.arb;
    cell.cex.tau_cex = c.tau_cex_bps / 1e4;
    for (double b : c.spreads_bps) cell.cex.spreads.push_back(b / 1e4);
    cell.initial_value = c.initial_value_usd;
    return cell;
}

SweepGrid make_grid(const RunConfig& c, const SweepAxes& axes) {
    SweepGrid g;
    g.axes = axes;
    g.strategy = c.strategy;
    g.discovery_delay_steps = c.arb.discovery_delay_steps;
    for (double b : c.spreads_bps) g.spreads.push_back(b / 1e4);
    g.initial_value = c.initial_value_usd;
    return g;
}

}  // namespace rvr
