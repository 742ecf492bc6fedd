#include "dlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dlab/error.hpp"
#include "dlab/fft.hpp"

namespace dlab {
namespace {

constexpr std::size_t kMaxCoefficients = std::size_t{1} << 28;

std::size_t box_size(int n, int radius) {
    std::size_t total = 1;
    const auto side = static_cast<std::size_t>(2 * radius + 1);
    for (int d = 0; d < n; ++d) {
        require(total <= kMaxCoefficients / side, ErrorCode::InvalidArgument, "spectral box too large");
        total *= side;
    }
    return total;
}

double two_pi_pow(int n) { return std::pow(2.0 * std::numbers::pi, n); }

std::size_t grid_slot(std::span<const int> xi, int M) {
    std::size_t slot = 0;
    for (int x : xi) {
        int r = x % M;
        if (r < 0) r += M;
        slot = slot * static_cast<std::size_t>(M) + static_cast<std::size_t>(r);
    }
    return slot;
}

}  // namespace

SpectralState::SpectralState(int dimension, int box_radius) : n_(dimension), radius_(box_radius) {
    require(dimension >= 1, ErrorCode::InvalidArgument, "dimension must be positive");
    require(box_radius >= 0, ErrorCode::InvalidArgument, "box radius must be nonnegative");
    coefficients_.assign(box_size(dimension, box_radius), Complex{});
}

bool SpectralState::contains(std::span<const int> xi) const noexcept {
    if (static_cast<int>(xi.size()) != n_) return false;
    return std::all_of(xi.begin(), xi.end(), [this](int x) { return x >= -radius_ && x <= radius_; });
}

std::size_t SpectralState::index_of(std::span<const int> xi) const {
    require(static_cast<int>(xi.size()) == n_, ErrorCode::DimensionMismatch, "lattice point has wrong dimension");
    std::size_t index = 0;
    const auto s = static_cast<std::size_t>(side());
    for (int x : xi) {
        require(x >= -radius_ && x <= radius_, ErrorCode::InvalidArgument,
                "lattice point outside box of radius " + std::to_string(radius_));
        index = index * s + static_cast<std::size_t>(x + radius_);
    }
    return index;
}

void SpectralState::lattice_point(std::size_t index, std::span<int> xi) const noexcept {
    const auto s = static_cast<std::size_t>(side());
    for (int d = n_ - 1; d >= 0; --d) {
        xi[static_cast<std::size_t>(d)] = static_cast<int>(index % s) - radius_;
        index /= s;
    }
}

std::vector<int> SpectralState::lattice_point(std::size_t index) const {
    std::vector<int> xi(static_cast<std::size_t>(n_));
    lattice_point(index, xi);
    return xi;
}

double SpectralState::l2_norm_squared() const noexcept {
    double sum = 0.0;
    for (const Complex& c : coefficients_) sum += std::norm(c);
    return sum;
}

double SpectralState::l2_norm() const noexcept { return std::sqrt(l2_norm_squared()); }

bool SpectralState::is_zero() const noexcept {
    return std::all_of(coefficients_.begin(), coefficients_.end(), [](const Complex& c) { return c == Complex{}; });
}

std::size_t SpectralState::nonzero_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(coefficients_.begin(), coefficients_.end(), [](const Complex& c) { return c != Complex{}; }));
}

SpectralState SpectralState::with_radius(int box_radius) const {
    SpectralState out(n_, box_radius);
    std::vector<int> xi(static_cast<std::size_t>(n_));
    for (std::size_t i = 0; i < coefficients_.size(); ++i) {
        if (coefficients_[i] == Complex{}) continue;
        lattice_point(i, xi);
        if (out.contains(xi)) out.coefficients_[out.index_of(xi)] = coefficients_[i];
    }
    return out;
}

SpectralState& SpectralState::operator*=(Complex factor) noexcept {
    for (Complex& c : coefficients_) c *= factor;
    return *this;
}

SpectralState& SpectralState::operator+=(const SpectralState& other) {
    require(n_ == other.n_ && radius_ == other.radius_, ErrorCode::DimensionMismatch, "state shapes differ");
    for (std::size_t i = 0; i < coefficients_.size(); ++i) coefficients_[i] += other.coefficients_[i];
    return *this;
}

SpectralState& SpectralState::operator-=(const SpectralState& other) {
    require(n_ == other.n_ && radius_ == other.radius_, ErrorCode::DimensionMismatch, "state shapes differ");
    for (std::size_t i = 0; i < coefficients_.size(); ++i) coefficients_[i] -= other.coefficients_[i];
    return *this;
}

SpectralState operator-(SpectralState a, const SpectralState& b) { return a -= b; }
SpectralState operator+(SpectralState a, const SpectralState& b) { return a += b; }

nlohmann::json SpectralState::to_json() const {
    nlohmann::json coeffs = nlohmann::json::array();
    for (const Complex& c : coefficients_) coeffs.push_back({c.real(), c.imag()});
    return {{"n", n_}, {"box_radius", radius_}, {"coefficients", std::move(coeffs)}};
}

SpectralState SpectralState::from_json(const nlohmann::json& doc) {
    auto bad = [](const std::string& what) { fail(ErrorCode::ConfigInvalid, "state: " + what); };
    if (!doc.is_object()) bad("document must be an object");
    for (const auto& [key, value] : doc.items()) {
        if (key != "n" && key != "box_radius" && key != "coefficients") bad("unknown key '" + key + "'");
    }
    if (!doc.contains("n") || !doc["n"].is_number_integer()) bad("'n' must be an integer");
    if (!doc.contains("box_radius") || !doc["box_radius"].is_number_integer()) bad("'box_radius' must be an integer");
    if (!doc.contains("coefficients") || !doc["coefficients"].is_array()) bad("'coefficients' must be an array");
    const int n = doc["n"].get<int>();
    const int radius = doc["box_radius"].get<int>();
    if (n < 1) bad("'n' must be positive");
    if (radius < 0) bad("'box_radius' must be nonnegative");
    SpectralState state(n, radius);
    const auto& coeffs = doc["coefficients"];
    if (coeffs.size() != state.size())
        bad("'coefficients' has " + std::to_string(coeffs.size()) + " entries, expected " + std::to_string(state.size()));
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const auto& pair = coeffs[i];
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
            bad("'coefficients' entry " + std::to_string(i) + " must be [re, im]");
        state.coefficients_[i] = {pair[0].get<double>(), pair[1].get<double>()};
    }
    return state;
}

int SupportBounds::width() const noexcept {
    int w = 0;
    for (std::size_t d = 0; d < lo.size(); ++d) w = std::max(w, hi[d] - lo[d] + 1);
    return w;
}

SupportBounds support_bounds(const SpectralState& state) {
    SupportBounds bounds;
    const auto n = static_cast<std::size_t>(state.dimension());
    std::vector<int> xi(n);
    const auto coeffs = state.coefficients();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == Complex{}) continue;
        state.lattice_point(i, xi);
        if (bounds.lo.empty()) {
            bounds.lo = xi;
            bounds.hi = xi;
            continue;
        }
        for (std::size_t d = 0; d < n; ++d) {
            bounds.lo[d] = std::min(bounds.lo[d], xi[d]);
            bounds.hi[d] = std::max(bounds.hi[d], xi[d]);
        }
    }
    return bounds;
}

bool in_band(const FrequencyBand& band, std::span<const int> xi) {
    if (const auto* dyadic = std::get_if<DyadicBand>(&band)) {
        long long r2 = 0;
        for (int x : xi) r2 += static_cast<long long>(x) * x;
        if (dyadic->N == 0) return r2 == 0;
        const long long N = dyadic->N;
        return r2 >= N * N && r2 < 4 * N * N;
    }
    const auto& cube = std::get<CubeBand>(band);
    require(cube.center.size() == xi.size(), ErrorCode::DimensionMismatch, "cube center has wrong dimension");
    for (std::size_t d = 0; d < xi.size(); ++d)
        if (2LL * std::abs(xi[d] - cube.center[d]) > cube.side) return false;
    return true;
}

SpectralState project(const SpectralState& state, const FrequencyBand& band) {
    SpectralState out = state;
    std::vector<int> xi(static_cast<std::size_t>(state.dimension()));
    auto coeffs = out.coefficients();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == Complex{}) continue;
        out.lattice_point(i, xi);
        if (!in_band(band, xi)) coeffs[i] = Complex{};
    }
    return out;
}

SpectralState propagate(const SpectralState& state, const PhaseFunction& phi, double t) {
    require(phi.dimension() == state.dimension(), ErrorCode::DimensionMismatch, "phase and state dimensions differ");
    SpectralState out = state;
    if (t == 0.0) return out;
    std::vector<int> xi(static_cast<std::size_t>(state.dimension()));
    auto coeffs = out.coefficients();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == Complex{}) continue;
        out.lattice_point(i, xi);
        coeffs[i] *= std::polar(1.0, t * phi.at_lattice(xi));
    }
    return out;
}

double sobolev_norm(const SpectralState& state, double s) {
    std::vector<int> xi(static_cast<std::size_t>(state.dimension()));
    const auto coeffs = state.coefficients();
    double sum = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == Complex{}) continue;
        state.lattice_point(i, xi);
        double r2 = 1.0;
        for (int x : xi) r2 += static_cast<double>(x) * x;
        sum += std::pow(r2, s) * std::norm(coeffs[i]);
    }
    return std::sqrt(two_pi_pow(state.dimension()) * sum);
}

Complex evaluate_direct(const SpectralState& state, const PhaseFunction& phi, double t, std::span<const double> x) {
    require(static_cast<int>(x.size()) == state.dimension(), ErrorCode::DimensionMismatch, "point has wrong dimension");
    std::vector<int> xi(static_cast<std::size_t>(state.dimension()));
    const auto coeffs = state.coefficients();
    Complex sum{};
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == Complex{}) continue;
        state.lattice_point(i, xi);
        double arg = t * phi.at_lattice(xi);
        for (std::size_t d = 0; d < xi.size(); ++d) arg += xi[d] * x[d];
        sum += coeffs[i] * std::polar(1.0, arg);
    }
    return sum;
}

std::span<const Complex> SpaceTimeField::at_time(std::size_t k) const {
    std::size_t block = 1;
    for (int d = 0; d < dimension; ++d) block *= static_cast<std::size_t>(points_per_dim);
    return std::span<const Complex>(values).subspan(k * block, block);
}

ModeTable mode_table(const SpectralState& state, const PhaseFunction& phi, int points_per_dim) {
    require(phi.dimension() == state.dimension(), ErrorCode::DimensionMismatch, "phase and state dimensions differ");
    require(points_per_dim >= 1, ErrorCode::InvalidArgument, "grid size must be positive");
    ModeTable table;
    table.dimension = state.dimension();
    table.points_per_dim = points_per_dim;
    std::vector<int> xi(static_cast<std::size_t>(state.dimension()));
    const auto coeffs = state.coefficients();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == Complex{}) continue;
        state.lattice_point(i, xi);
        table.slot.push_back(grid_slot(xi, points_per_dim));
        table.coefficient.push_back(coeffs[i]);
        table.phase.push_back(phi.at_lattice(xi));
    }
    return table;
}

void load_and_synthesize(const ModeTable& modes, double time, FftGrid& grid) {
    grid.clear();
    auto values = grid.values();
    for (std::size_t k = 0; k < modes.slot.size(); ++k)
        values[modes.slot[k]] += modes.coefficient[k] * std::polar(1.0, time * modes.phase[k]);
    grid.to_physical();
}

SpaceTimeField synthesize(const SpectralState& state, const SpaceTimeGrid& grid, const PhaseFunction& phi,
                          const Executor& executor) {
    const int M = grid.points_per_dim;
    require(M >= state.side(), ErrorCode::GridTooCoarse,
            "grid with M=" + std::to_string(M) + " cannot resolve box radius " + std::to_string(state.box_radius()));
    const ModeTable modes = mode_table(state, phi, M);
    SpaceTimeField field;
    field.dimension = state.dimension();
    field.points_per_dim = M;
    field.times = grid.time_nodes;
    std::size_t block = 1;
    for (int d = 0; d < field.dimension; ++d) block *= static_cast<std::size_t>(M);
    field.values.resize(block * grid.time_nodes.size());
    executor.for_chunks(grid.time_nodes.size(), [&](std::size_t begin, std::size_t end) {
        FftGrid work(field.dimension, M);
        for (std::size_t k = begin; k < end; ++k) {
            load_and_synthesize(modes, grid.time_nodes[k], work);
            std::copy(work.values().begin(), work.values().end(),
                      field.values.begin() + static_cast<std::ptrdiff_t>(k * block));
        }
    });
    return field;
}

RecenteredState recenter(const SpectralState& state, const PhaseFunction& phi, const FrequencyBand& band) {
    const auto* cube = std::get_if<CubeBand>(&band);
    require(cube != nullptr, ErrorCode::InvalidArgument, "recentering needs a cube band");
    require(static_cast<int>(cube->center.size()) == state.dimension() && phi.dimension() == state.dimension(),
            ErrorCode::DimensionMismatch, "cube, phase and state dimensions differ");
    require(cube->side >= 0, ErrorCode::InvalidArgument, "cube side must be nonnegative");

    const int n = state.dimension();
    Vector xi0(n);
    for (int d = 0; d < n; ++d) xi0(d) = cube->center[static_cast<std::size_t>(d)];
    const Jets jets = evaluate_jets(phi, xi0, 1);
    const Vector velocity = *jets.gradient;
    require(velocity.allFinite(), ErrorCode::SingularPoint, "gradient of phase unavailable at cube center");
    const double phi0 = jets.value;

    const int half = cube->side / 2;
    SpectralState base(n, half);
    std::vector<int> xi(static_cast<std::size_t>(n));
    std::vector<int> shifted(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < base.size(); ++i) {
        base.lattice_point(i, xi);
        for (std::size_t d = 0; d < xi.size(); ++d) shifted[d] = xi[d] + cube->center[d];
        if (state.contains(shifted)) base.coefficients()[i] = state.at(shifted);
    }

    auto value = [phi, xi0, velocity, phi0](const Vector& p) {
        return phi(xi0 + p) - phi0 - p.dot(velocity);
    };
    auto gradient = [phi, xi0, velocity](const Vector& p) -> Vector {
        return *evaluate_jets(phi, xi0 + p, 1).gradient - velocity;
    };
    auto hessian = [phi, xi0](const Vector& p) -> Matrix { return *evaluate_jets(phi, xi0 + p, 2).hessian; };

    return RecenteredState{std::move(base), velocity, PhaseFunction::custom(n, value, gradient, hessian),
                           cube->center, phi0};
}

}  // namespace dlab
