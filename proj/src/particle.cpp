#include "fbam/particle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace fbam {

void SimConfig::validate() const {
    if (n_paths < 1) throw std::invalid_argument("sim.paths must be >= 1");
    if (n_steps < 1) throw std::invalid_argument("sim.steps must be >= 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("sim.lambda must be > 0");
    if (order < 0 || order > kMaxOrder) throw std::invalid_argument("sim.order must lie in [0, 4]");
    mollifier.validate();
}

double draw_next_jump(RandomStream& clock, double t, double lambda) {
    return jump_after(t, clock.uniform(), lambda);
}

JumpSchedule draw_jump_schedule(RandomStream& clock, double t, double expiry, double lambda,
                                double dt, int n_steps, int max_jumps) {
    JumpSchedule js;
    double tau = t;
    for (int k = 0; k < max_jumps; ++k) {
        tau = draw_next_jump(clock, tau, lambda);
        if (tau >= expiry) break;
        js.times.push_back(tau);
        js.nodes.push_back(std::min(static_cast<int>(std::floor(tau / dt)), n_steps - 1));
    }
    return js;
}

double chat_weight(double tau_prev, double tau, double c_at_tau, double lambda) {
    return std::exp(lambda * (tau - tau_prev)) * c_at_tau / lambda;
}

std::array<StreamId, 8> path_streams(std::uint64_t seed, std::uint64_t path, int salt) {
    std::array<StreamId, 8> ids;
    for (std::uint32_t b = 0; b < 8; ++b) ids[b] = StreamId{seed, path, 8u * static_cast<std::uint32_t>(salt) + b};
    return ids;
}

namespace {

enum Branch { kMainDiff, kMainClock, kADiff, kAClock, kBDiff, kBClock, kDDiff, kDClock };

/// Quantities of one particle at one interaction time.
struct Jump {
    double time = 0.0;
    double c = 0.0;     // premium rate
    double disc = 1.0;  // exp(-int_r)
    double theta = 0.0;
    double d0 = 0.0;    // delta
    double d1 = 0.0;    // first derivative of delta
    double d2 = 0.0;    // second derivative of delta
    bool far = true;    // every kernel and the step vanish
};

template <class Model>
PathState step(const Model& p, const PathState& s, double dt, RandomStream& rs) {
    if constexpr (std::is_same_v<Model, BlackScholesParams>) {
        return step_bs(p, s, dt, rs.normal());
    } else {
        const double z1 = rs.normal();
        const double z2 = rs.normal();
        return step_heston(p, s, dt, z1, z2);
    }
}

template <class Model>
class PathSimulator {
public:
    PathSimulator(const Model& p, const OptionSpec& spec, const EuropeanPricer& v0, const SimConfig& cfg)
        : p_(p), spec_(spec), v0_(v0), cfg_(cfg), dt_(spec.expiry / cfg.n_steps) {
        const auto& m = cfg.mollifier;
        far_cut_ = cfg.order >= 2 ? 12.0 * std::sqrt(std::max({m.h0, m.h1, m.h2})) : 0.0;
    }

    PathContribution run(std::uint64_t path, int salt, int order) const {
        PathContribution out{};
        const auto ids = path_streams(cfg_.seed, path, salt);
        const double lam = cfg_.lambda;
        const double expiry = spec_.expiry;

        // main particle: chain tau_1 < tau_2 < ... along one path
        RandomStream diff(ids[kMainDiff]);
        RandomStream clock(ids[kMainClock]);
        PathState state;
        state.spot = spec_.spot;
        if constexpr (std::is_same_v<Model, HestonParams>) state.variance = p_.v0;
        int node = 0;
        std::array<Jump, kMaxOrder + 1> main{};
        std::array<PathState, kMaxOrder + 1> main_state{};
        std::array<int, kMaxOrder + 1> main_node{};
        int n_main = 0;
        double prev = 0.0;
        for (int k = 1; k <= order; ++k) {
            const double tau = draw_next_jump(clock, prev, lam);
            if (tau >= expiry) break;
            advance(state, node, target_node(tau), diff);
            main[k] = evaluate(state, tau);
            main_state[k] = state;
            main_node[k] = node;
            n_main = k;
            prev = tau;
            if (main[k].far) break;  // every term through this jump vanishes
        }
        if (n_main == 0) return out;

        const auto w = [lam](const Jump& a, const Jump& b) { return chat_weight(a.time, b.time, b.c, lam); };
        const Jump origin{};
        const Jump& j1 = main[1];
        const double w01 = w(origin, j1);

        out[1] = j1.disc * w01 * j1.theta;
        if (order < 2 || n_main < 2 || j1.far) return out;

        const Jump& j2 = main[2];
        const double w12 = w(j1, j2);
        out[2] = -j2.disc * w01 * j1.d0 * w12 * j2.theta;
        if (order < 3) return out;

        // offspring group from tau_1 (the main particle is the other group)
        const double g_main = j2.disc / j1.disc * w12 * j2.theta;
        Jump ja;
        const bool has_a = spawn(main_state[1], main_node[1], j1.time, ids[kADiff], ids[kAClock], ja);
        const double g_a = has_a ? ja.disc / j1.disc * w(j1, ja) * ja.theta : 0.0;

        double w23 = 0.0;
        if (n_main >= 3) {
            const Jump& j3 = main[3];
            w23 = w(j2, j3);
            out[3] = j3.disc * w01 * j1.d0 * w12 * j2.d0 * w23 * j3.theta;
        }
        out[3] += 0.5 * j1.disc * w01 * j1.d1 * g_main * g_a;
        if (order < 4) return out;

        double c4 = 0.0;
        if (g_main != 0.0 && g_a != 0.0 && j1.d2 != 0.0) {
            Jump jb;
            const bool has_b = spawn(main_state[1], main_node[1], j1.time, ids[kBDiff], ids[kBClock], jb);
            const double g_b = has_b ? jb.disc / j1.disc * w(j1, jb) * jb.theta : 0.0;
            c4 += j1.disc * w01 * j1.d2 * g_main * g_a * g_b / 6.0;
        }
        if (n_main >= 3) {
            const Jump& j3 = main[3];
            const double chain_from_1 = j3.disc / j1.disc * w12 * j2.d0 * w23 * j3.theta;
            c4 += j1.disc * w01 * j1.d1 * g_a * chain_from_1;
            if (n_main >= 4) {
                const Jump& j4 = main[4];
                c4 += j4.disc * w01 * j1.d0 * w12 * j2.d0 * w23 * j3.d0 * w(j3, j4) * j4.theta;
            }
            const double g_main2 = j3.disc / j2.disc * w23 * j3.theta;
            if (g_main2 != 0.0 && j2.d1 != 0.0 && j1.d0 != 0.0) {
                Jump jd;
                const bool has_d = spawn(main_state[2], main_node[2], j2.time, ids[kDDiff], ids[kDClock], jd);
                const double g_d = has_d ? jd.disc / j2.disc * w(j2, jd) * jd.theta : 0.0;
                c4 += 0.5 * j2.disc * w01 * j1.d0 * w12 * j2.d1 * g_main2 * g_d;
            }
        }
        out[4] = -c4;
        return out;
    }

private:
    int target_node(double tau) const {
        return std::min(static_cast<int>(std::floor(tau / dt_)), cfg_.n_steps - 1);
    }

    void advance(PathState& s, int& node, int target, RandomStream& rs) const {
        while (node < target) {
            s = step(p_, s, dt_, rs);
            ++node;
            s.t = node * dt_;
        }
    }

    Jump evaluate(const PathState& s, double tau) const {
        Jump j;
        j.time = tau;
        j.c = premium_rate(spec_, p_.r, p_.y, s.spot);
        j.disc = std::exp(-s.int_r);
        const double psi = payoff(spec_, s.spot).psi;
        if (psi <= -far_cut_) return j;
        j.far = false;
        const double x = psi - v0_(s);
        const auto& m = cfg_.mollifier;
        j.theta = psi > 0.0 ? theta_step(x) : 0.0;
        if (cfg_.order >= 2) {
            j.d0 = delta_gauss(x, m.h0);
            j.d1 = delta_prime_gauss(x, m.h1);
            j.d2 = delta_second_gauss(x, m.h2);
        }
        return j;
    }

    /// Child particle from a copy of `from`; returns false if its first interaction is past T.
    bool spawn(const PathState& from, int from_node, double t0, StreamId diff_id, StreamId clock_id,
               Jump& out) const {
        RandomStream clock(clock_id);
        const double tau = draw_next_jump(clock, t0, cfg_.lambda);
        if (tau >= spec_.expiry) return false;
        RandomStream diff(diff_id);
        PathState s = from;
        int node = from_node;
        advance(s, node, target_node(tau), diff);
        out = evaluate(s, tau);
        return true;
    }

    const Model& p_;
    const OptionSpec& spec_;
    const EuropeanPricer& v0_;
    const SimConfig& cfg_;
    double dt_;
    double far_cut_;
};

struct Moments {
    std::array<double, kMaxOrder + 1> sum{};
    std::array<double, kMaxOrder + 1> sum_sq{};
    std::array<double, kMaxOrder + 1> cum_sum{};
    std::array<double, kMaxOrder + 1> cum_sum_sq{};

    void add(const PathContribution& c) {
        double cum = 0.0;
        for (int k = 1; k <= kMaxOrder; ++k) {
            cum += c[k];
            sum[k] += c[k];
            sum_sq[k] += c[k] * c[k];
            cum_sum[k] += cum;
            cum_sum_sq[k] += cum * cum;
        }
    }

    void merge(const Moments& o) {
        for (int k = 0; k <= kMaxOrder; ++k) {
            sum[k] += o.sum[k];
            sum_sq[k] += o.sum_sq[k];
            cum_sum[k] += o.cum_sum[k];
            cum_sum_sq[k] += o.cum_sum_sq[k];
        }
    }
};

/// Fixed-shape pairwise reduction so the result does not depend on scheduling.
Moments reduce_pairwise(std::vector<Moments>& parts, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return parts[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    Moments left = reduce_pairwise(parts, lo, mid);
    left.merge(reduce_pairwise(parts, mid, hi));
    return left;
}

Estimate to_estimate(double sum, double sum_sq, double n) {
    Estimate e;
    e.mean = sum / n;
    if (n > 1.0) {
        const double var = std::max(sum_sq / n - e.mean * e.mean, 0.0) * n / (n - 1.0);
        e.stderr_ = std::sqrt(var / n);
    }
    return e;
}

constexpr std::uint64_t kChunk = 1024;

}  // namespace

ParticleEngine::ParticleEngine(ModelParams model, OptionSpec spec, SimConfig config)
    : model_(model), spec_(spec), config_(config), european_(model, spec, config.fourier) {
    config_.validate();
    std::visit([](const auto& p) { p.validate(); }, model_);
    if (is_heston(model_) && config_.order > 3)
        throw std::invalid_argument("order 4 is only available for the Black-Scholes model");
}

PathContribution ParticleEngine::path_contribution(std::uint64_t path) const {
    return std::visit(
        [&](const auto& p) {
            using M = std::decay_t<decltype(p)>;
            PathSimulator<M> sim(p, spec_, european_, config_);
            if (!config_.independent_orders) return sim.run(path, 0, config_.order);
            PathContribution c{};
            for (int k = 1; k <= config_.order; ++k) c[k] = sim.run(path, k, k)[k];
            return c;
        },
        model_);
}

ExpansionResult ParticleEngine::run() const {
    ExpansionResult res;
    res.order = config_.order;
    res.n_paths = config_.n_paths;
    const double base = european_(0.0, spec_.spot, std::visit([](const auto& p) {
                                      if constexpr (std::is_same_v<std::decay_t<decltype(p)>, HestonParams>)
                                          return p.v0;
                                      else
                                          return 0.0;
                                  }, model_));
    res.mean.assign(config_.order + 1, 0.0);
    res.stderr_.assign(config_.order + 1, 0.0);
    res.cumulative.assign(config_.order + 1, base);
    res.cumulative_stderr.assign(config_.order + 1, 0.0);
    res.mean[0] = base;
    if (config_.order == 0) return res;

    const std::uint64_t n = config_.n_paths;
    const std::size_t n_chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
    std::vector<Moments> parts(n_chunks);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t c = next++; c < n_chunks; c = next++) {
            Moments m;
            const std::uint64_t lo = c * kChunk;
            const std::uint64_t hi = std::min<std::uint64_t>(n, lo + kChunk);
            for (std::uint64_t i = lo; i < hi; ++i) m.add(path_contribution(i));
            parts[c] = m;
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(config_.workers, static_cast<unsigned>(n_chunks)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    }
    const Moments total = reduce_pairwise(parts, 0, n_chunks);

    const double nd = static_cast<double>(n);
    for (int k = 1; k <= config_.order; ++k) {
        const Estimate e = to_estimate(total.sum[k], total.sum_sq[k], nd);
        const Estimate c = to_estimate(total.cum_sum[k], total.cum_sum_sq[k], nd);
        res.mean[k] = e.mean;
        res.stderr_[k] = e.stderr_;
        res.cumulative[k] = base + c.mean;
        res.cumulative_stderr[k] = c.stderr_;
    }
    return res;
}

namespace {
Estimate single_order(const ModelParams& model, const OptionSpec& spec, SimConfig config, int k) {
    config.order = k;
    const ExpansionResult r = ParticleEngine(model, spec, config).run();
    return {r.mean[k], r.stderr_[k]};
}
}  // namespace

Estimate estimate_order1(const ModelParams& model, const OptionSpec& spec, SimConfig config) {
    return single_order(model, spec, config, 1);
}
Estimate estimate_order2(const ModelParams& model, const OptionSpec& spec, SimConfig config) {
    return single_order(model, spec, config, 2);
}
Estimate estimate_order3(const ModelParams& model, const OptionSpec& spec, SimConfig config) {
    return single_order(model, spec, config, 3);
}
Estimate estimate_order4(const ModelParams& model, const OptionSpec& spec, SimConfig config) {
    return single_order(model, spec, config, 4);
}

ExpansionResult price_american(const ModelParams& model, const OptionSpec& spec, const SimConfig& config) {
    if (config.order > kMaxOrder) throw std::invalid_argument("expansion order above 4 is not supported");
    return ParticleEngine(model, spec, config).run();
}

}  // namespace fbam
