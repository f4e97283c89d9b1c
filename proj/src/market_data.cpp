#include "rvr/market_data.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>

#include "rvr/error.hpp"
#include "rvr/format.hpp"

namespace rvr {

PriceSeries::PriceSeries(std::vector<std::int64_t> timestamps,
                         std::vector<double> prices_row_major,
                         std::vector<std::string> asset_labels)
    : timestamps_(std::move(timestamps)),
      prices_(std::move(prices_row_major)),
      labels_(std::move(asset_labels)) {
    const std::size_t n = labels_.size();
    const std::size_t t = timestamps_.size();
    if (n < 2) throw DataError("price series needs at least 2 assets");
    if (t < 2) throw DataError("price series needs at least 2 rows");
    if (prices_.size() != n * t) throw DataError("price matrix size does not match T x N");
    const auto step = timestamps_[1] - timestamps_[0];
    if (step <= 0) throw DataError("timestamps must be strictly increasing");
    for (std::size_t r = 1; r < t; ++r) {
        if (timestamps_[r] - timestamps_[r - 1] != step) {
            throw DataError("non-uniform timestamp spacing at row " + std::to_string(r));
        }
    }
    for (std::size_t k = 0; k < prices_.size(); ++k) {
        if (!(prices_[k] > 0.0) || !std::isfinite(prices_[k])) {
            throw DataError("non-positive or non-finite price at row " + std::to_string(k / n) +
                            ", asset " + labels_[k % n]);
        }
    }
}

PriceSeries PriceSeries::truncated(std::size_t count) const {
    if (count > steps()) count = steps();
    std::vector<std::int64_t> ts(timestamps_.begin(), timestamps_.begin() + static_cast<std::ptrdiff_t>(count));
    std::vector<double> px(prices_.begin(), prices_.begin() + static_cast<std::ptrdiff_t>(count * assets()));
    return PriceSeries(std::move(ts), std::move(px), labels_);
}

PriceSeries parse_price_csv(std::istream& in, const std::optional<std::vector<std::string>>& expected_assets) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw DataError("empty price CSV");
    ++line_no;
    const auto header = split(trim(line), ',');
    if (header.size() < 3 || trim(header[0]) != "timestamp") {
        throw DataError("line 1: header must be 'timestamp,<label1>,...,<labelN>' with N >= 2");
    }
    std::vector<std::string> labels;
    for (std::size_t i = 1; i < header.size(); ++i) labels.emplace_back(trim(header[i]));
    if (expected_assets && *expected_assets != labels) {
        std::string want;
        for (const auto& l : *expected_assets) want += (want.empty() ? "" : ",") + l;
        throw DataError("asset label mismatch: expected [" + want + "], file has [" +
                        std::string(trim(line)).substr(10) + "]");
    }
    const std::size_t n = labels.size();

    std::vector<std::int64_t> ts;
    std::vector<double> px;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto fields = split(body, ',');
        const auto where =
            "line " + std::to_string(line_no) + " (row " + std::to_string(ts.size() + 1) + "): ";
        if (fields.size() != n + 1) {
            throw DataError(where + "expected " + std::to_string(n + 1) + " fields, found " +
                            std::to_string(fields.size()));
        }
        try {
            ts.push_back(parse_int64(fields[0]));
        } catch (const std::invalid_argument& e) {
            throw DataError(where + "bad timestamp: " + e.what());
        }
        for (std::size_t i = 0; i < n; ++i) {
            double p = 0.0;
            try {
                p = parse_double(fields[i + 1]);
            } catch (const std::invalid_argument& e) {
                throw DataError(where + "bad price for " + labels[i] + ": " + e.what());
            }
            if (!(p > 0.0) || !std::isfinite(p)) {
                throw DataError(where + "non-positive price for " + labels[i]);
            }
            px.push_back(p);
        }
        if (ts.size() >= 2) {
            const auto step = ts[1] - ts[0];
            const auto gap = ts[ts.size() - 1] - ts[ts.size() - 2];
            if (gap <= 0) throw DataError(where + "timestamps not strictly increasing");
            if (gap != step) {
                throw DataError(where + "non-uniform timestamp spacing (" + std::to_string(gap) +
                                "s vs " + std::to_string(step) + "s)");
            }
        }
    }
    return PriceSeries(std::move(ts), std::move(px), std::move(labels));
}

PriceSeries load_price_csv(const std::filesystem::path& path,
                           const std::optional<std::vector<std::string>>& expected_assets) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open price CSV: " + path.string());
    try {
        return parse_price_csv(in, expected_assets);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_price_csv(std::ostream& out, const PriceSeries& series) {
    out << "timestamp";
    for (const auto& l : series.asset_labels()) out << ',' << l;
    out << '\n';
    for (std::size_t t = 0; t < series.steps(); ++t) {
        out << series.timestamps()[t];
        for (double p : series.row(t)) out << ',' << format_double(p);
        out << '\n';
    }
}

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> correlation_eigen(const std::vector<double>& correlation,
                                                                 std::size_t n) {
    Eigen::MatrixXd corr(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) corr(i, j) = correlation[i * n + j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
    if (eig.info() != Eigen::Success) throw ConfigError("gbm: correlation eigen-decomposition failed");
    if (eig.eigenvalues().minCoeff() < -1e-12) {
        throw ConfigError("gbm: correlation matrix is not positive semi-definite");
    }
    return eig;
}

}  // namespace

void GbmSpec::validate() const {
    const std::size_t n = initial_prices.size();
    if (n < 2) throw ConfigError("gbm: need at least 2 assets");
    if (drifts.size() != n || volatilities.size() != n) {
        throw ConfigError("gbm: drifts and volatilities must have one entry per asset");
    }
    if (correlation.size() != n * n) throw ConfigError("gbm: correlation must be N x N");
    if (!asset_labels.empty() && asset_labels.size() != n) {
        throw ConfigError("gbm: asset_labels must have one entry per asset");
    }
    if (steps < 2) throw ConfigError("gbm: steps must be >= 2");
    if (step_seconds <= 0) throw ConfigError("gbm: step_seconds must be positive");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(initial_prices[i] > 0.0)) throw ConfigError("gbm: initial prices must be positive");
        if (!(volatilities[i] >= 0.0)) throw ConfigError("gbm: volatilities must be >= 0");
        if (!std::isfinite(drifts[i])) throw ConfigError("gbm: drifts must be finite");
        if (correlation[i * n + i] != 1.0) throw ConfigError("gbm: correlation diagonal must be 1");
        for (std::size_t j = 0; j < i; ++j) {
            if (std::abs(correlation[i * n + j] - correlation[j * n + i]) > 1e-12) {
                throw ConfigError("gbm: correlation must be symmetric");
            }
        }
    }
    correlation_eigen(correlation, n);
}

PriceSeries generate_gbm(const GbmSpec& spec) {
    spec.validate();
    const std::size_t n = spec.initial_prices.size();

    const auto eig = correlation_eigen(spec.correlation, n);
    // corr = F F^T with F = V sqrt(Lambda)
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd factor = eig.eigenvectors() * root.asDiagonal();

    std::vector<std::string> labels = spec.asset_labels;
    if (labels.empty()) {
        for (std::size_t i = 0; i < n; ++i) labels.push_back("A" + std::to_string(i + 1));
    }

    std::mt19937_64 rng(spec.seed);
    boost::random::normal_distribution<double> normal(0.0, 1.0);

    std::vector<std::int64_t> ts(spec.steps);
    std::vector<double> px(spec.steps * n);
    for (std::size_t i = 0; i < n; ++i) px[i] = spec.initial_prices[i];
    ts[0] = spec.start_timestamp;

    Eigen::VectorXd z(n);
    for (std::size_t t = 1; t < spec.steps; ++t) {
        ts[t] = spec.start_timestamp + static_cast<std::int64_t>(t) * spec.step_seconds;
        for (std::size_t i = 0; i < n; ++i) z(static_cast<Eigen::Index>(i)) = normal(rng);
        const Eigen::VectorXd shock = factor * z;
        for (std::size_t i = 0; i < n; ++i) {
            const double inc = spec.drifts[i] + spec.volatilities[i] * shock(static_cast<Eigen::Index>(i));
            px[t * n + i] = px[(t - 1) * n + i] * std::exp(inc);
        }
    }
    return PriceSeries(std::move(ts), std::move(px), std::move(labels));
}

}  // namespace rvr
