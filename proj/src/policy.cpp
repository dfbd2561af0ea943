#include "bflsim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bflsim::drl {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

const std::array<std::size_t, 3>& offload_dims() {
    static const std::array<std::size_t, 3> dims = {cont_power, cont_bandwidth, cont_hash};
    return dims;
}

const std::array<std::size_t, 2>& local_dims() {
    static const std::array<std::size_t, 2> dims = {cont_cpu, cont_hash};
    return dims;
}

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) n += sizes[l] * sizes[l + 1] + sizes[l + 1];
    return n;
}

Vec Mlp::forward(const double* theta, const Vec& x, Cache* cache) const {
    if (x.size() != sizes.front()) throw std::invalid_argument("Mlp::forward: input dimension mismatch");
    Vec a = x;
    if (cache) {
        cache->acts.clear();
        cache->acts.push_back(a);
    }
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t in = sizes[l];
        const std::size_t out = sizes[l + 1];
        const double* w = theta + off;
        const double* b = theta + off + in * out;
        Vec next(out);
        for (std::size_t o = 0; o < out; ++o) {
            double s = b[o];
            const double* row = w + o * in;
            for (std::size_t i = 0; i < in; ++i) s += row[i] * a[i];
            next[o] = (l + 2 < sizes.size()) ? std::tanh(s) : s;
        }
        a = std::move(next);
        if (cache) cache->acts.push_back(a);
        off += in * out + out;
    }
    return a;
}

void Mlp::backward(const double* theta, const Cache& cache, const Vec& dout, double* dtheta,
                   Vec* dinput) const {
    Vec delta = dout;
    // Offsets of each layer's parameters.
    std::vector<std::size_t> offs(sizes.size() - 1, 0);
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        offs[l] = off;
        off += sizes[l] * sizes[l + 1] + sizes[l + 1];
    }
    for (std::size_t l = sizes.size() - 1; l-- > 0;) {
        const std::size_t in = sizes[l];
        const std::size_t out = sizes[l + 1];
        const Vec& a_in = cache.acts[l];
        const double* w = theta + offs[l];
        double* dw = dtheta + offs[l];
        double* db = dtheta + offs[l] + in * out;
        Vec dprev(in, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            const double d = delta[o];
            db[o] += d;
            double* dwrow = dw + o * in;
            const double* wrow = w + o * in;
            for (std::size_t i = 0; i < in; ++i) {
                dwrow[i] += d * a_in[i];
                dprev[i] += d * wrow[i];
            }
        }
        if (l > 0) {
            const Vec& a = cache.acts[l];  // post-tanh activation of layer l
            for (std::size_t i = 0; i < in; ++i) dprev[i] *= (1.0 - a[i] * a[i]);
        }
        delta = std::move(dprev);
    }
    if (dinput) *dinput = delta;
}

Mat Mlp::forward_batch(const double* theta, const Mat& x, BatchCache* cache) const {
    if (x.cols != sizes.front())
        throw std::invalid_argument("Mlp::forward_batch: input dimension mismatch");
    Mat a = x;
    if (cache) {
        cache->acts.clear();
        cache->acts.push_back(a);
    }
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t in = sizes[l];
        const std::size_t out = sizes[l + 1];
        const double* w = theta + off;
        const double* b = theta + off + in * out;
        const bool last = l + 2 >= sizes.size();
        Mat next(a.rows, out);
        for (std::size_t r = 0; r < a.rows; ++r) {
            const double* arow = a.data.data() + r * in;
            double* nrow = next.data.data() + r * out;
            for (std::size_t o = 0; o < out; ++o) nrow[o] = b[o];
            for (std::size_t i = 0; i < in; ++i) {
                const double ai = arow[i];
                if (ai == 0.0) continue;
                const double* wcol = w + i;  // stride `in` over outputs
                for (std::size_t o = 0; o < out; ++o) nrow[o] += ai * wcol[o * in];
            }
            if (!last)
                for (std::size_t o = 0; o < out; ++o) nrow[o] = std::tanh(nrow[o]);
        }
        a = std::move(next);
        if (cache) cache->acts.push_back(a);
        off += in * out + out;
    }
    return a;
}

void Mlp::backward_batch(const double* theta, const BatchCache& cache, const Mat& dout,
                         double* dtheta) const {
    Mat delta = dout;
    std::vector<std::size_t> offs(sizes.size() - 1, 0);
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        offs[l] = off;
        off += sizes[l] * sizes[l + 1] + sizes[l + 1];
    }
    for (std::size_t l = sizes.size() - 1; l-- > 0;) {
        const std::size_t in = sizes[l];
        const std::size_t out = sizes[l + 1];
        const Mat& a_in = cache.acts[l];
        const double* w = theta + offs[l];
        double* dw = dtheta + offs[l];
        double* db = dtheta + offs[l] + in * out;
        Mat dprev(delta.rows, in, 0.0);
        for (std::size_t r = 0; r < delta.rows; ++r) {
            const double* drow = delta.data.data() + r * out;
            const double* arow = a_in.data.data() + r * in;
            double* prow = dprev.data.data() + r * in;
            for (std::size_t o = 0; o < out; ++o) {
                const double d = drow[o];
                if (d == 0.0) continue;
                db[o] += d;
                double* dwrow = dw + o * in;
                const double* wrow = w + o * in;
                for (std::size_t i = 0; i < in; ++i) {
                    dwrow[i] += d * arow[i];
                    prow[i] += d * wrow[i];
                }
            }
        }
        if (l > 0) {
            for (std::size_t r = 0; r < dprev.rows; ++r) {
                const double* arow = a_in.data.data() + r * in;
                double* prow = dprev.data.data() + r * in;
                for (std::size_t i = 0; i < in; ++i) prow[i] *= (1.0 - arow[i] * arow[i]);
            }
        }
        delta = std::move(dprev);
    }
}

double categorical_kl(const Vec& p_old, const Vec& p_new) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p_old.size(); ++i) {
        if (p_old[i] <= 0.0) continue;
        kl += p_old[i] * (std::log(p_old[i]) - std::log(std::max(p_new[i], 1e-300)));
    }
    return kl;
}

double gaussian_kl(double mu_old, double sd_old, double mu_new, double sd_new) {
    const double dm = mu_old - mu_new;
    return std::log(sd_new / sd_old) +
           (sd_old * sd_old + dm * dm) / (2.0 * sd_new * sd_new) - 0.5;
}

PolicyNets::PolicyNets(std::size_t obs_dim, const SystemParams& params, std::uint64_t init_seed)
    : obs_dim_(obs_dim),
      num_md_(params.num_md),
      num_choices_(params.discrete_actions()),
      discrete_net_({obs_dim, 64, 32, params.num_md * params.discrete_actions()}),
      cont_net_({obs_dim + params.num_md + params.discrete_actions(), 128, 64, kContDims}) {
    caps_.resize(num_md_);
    for (std::size_t n = 0; n < num_md_; ++n) {
        caps_[n][cont_power] = params.md_max_power_w[n];
        caps_[n][cont_bandwidth] = params.max_bandwidth_hz;
        caps_[n][cont_cpu] = params.md_max_cpu_hz[n];
        caps_[n][cont_hash] = params.hash_cap;
    }

    discrete_offset_ = 0;
    cont_offset_ = discrete_net_.param_count();
    log_std_offset_ = cont_offset_ + cont_net_.param_count();
    theta_.assign(log_std_offset_ + kContDims, 0.0);

    Rng rng = Rng::stream(init_seed, 0, 0, "policy-init");
    auto init_net = [&rng, this](const Mlp& net, std::size_t offset) {
        std::size_t off = offset;
        for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
            const std::size_t in = net.sizes[l];
            const std::size_t out = net.sizes[l + 1];
            const double bound = 1.0 / std::sqrt(static_cast<double>(in));
            for (std::size_t i = 0; i < in * out; ++i) theta_[off + i] = rng.uniform(-bound, bound);
            off += in * out + out;  // biases stay zero
        }
    };
    init_net(discrete_net_, discrete_offset_);
    init_net(cont_net_, cont_offset_);
    for (std::size_t d = 0; d < kContDims; ++d) theta_[log_std_offset_ + d] = -0.5;
}

void PolicyNets::set_theta(const Vec& t) {
    if (t.size() != theta_.size()) throw std::invalid_argument("PolicyNets::set_theta: size mismatch");
    theta_ = t;
}

double PolicyNets::sigma(std::size_t dim) const {
    return std::exp(clampd(theta_[log_std_offset_ + dim], kLogStdMin, kLogStdMax));
}

Mat PolicyNets::discrete_probs(const Vec& obs) const {
    const Vec logits = discrete_net_.forward(theta_.data() + discrete_offset_, obs);
    Mat probs(num_md_, num_choices_);
    for (std::size_t n = 0; n < num_md_; ++n) {
        double mx = logits[n * num_choices_];
        for (std::size_t a = 0; a < num_choices_; ++a)
            mx = std::max(mx, logits[n * num_choices_ + a]);
        double z = 0.0;
        for (std::size_t a = 0; a < num_choices_; ++a) {
            probs.at(n, a) = std::exp(logits[n * num_choices_ + a] - mx);
            z += probs.at(n, a);
        }
        for (std::size_t a = 0; a < num_choices_; ++a) probs.at(n, a) /= z;
    }
    return probs;
}

Vec PolicyNets::cont_input(const Vec& obs, std::size_t md, std::size_t choice) const {
    Vec in;
    in.reserve(obs_dim_ + num_md_ + num_choices_);
    in.insert(in.end(), obs.begin(), obs.end());
    for (std::size_t n = 0; n < num_md_; ++n) in.push_back(n == md ? 1.0 : 0.0);
    for (std::size_t a = 0; a < num_choices_; ++a) in.push_back(a == choice ? 1.0 : 0.0);
    return in;
}

Vec PolicyNets::cont_means(const Vec& obs, std::size_t md, std::size_t choice) const {
    return cont_net_.forward(theta_.data() + cont_offset_, cont_input(obs, md, choice));
}

namespace {

// value in (lo, hi]  <->  z in R through tanh squashing.
double squash(double z, double lo, double hi) {
    return lo + (hi - lo) * 0.5 * (std::tanh(z) + 1.0);
}

double unsquash(double value, double lo, double hi) {
    double u = 2.0 * (value - lo) / (hi - lo) - 1.0;
    u = clampd(u, -1.0 + 1e-12, 1.0 - 1e-12);
    return 0.5 * std::log((1.0 + u) / (1.0 - u));  // atanh
}

// log N(z | mu, sd) - log |d value / d z|
double squashed_log_density(double z, double mu, double sd, double lo, double hi) {
    const double dz = (z - mu) / sd;
    const double log_normal = -0.5 * kLog2Pi - std::log(sd) - 0.5 * dz * dz;
    const double th = std::tanh(z);
    const double log_jac = std::log((hi - lo) * 0.5) + std::log(std::max(1.0 - th * th, 1e-300));
    return log_normal - log_jac;
}

}  // namespace

PolicyNets::Sample PolicyNets::sample_action(const Vec& obs, Rng& rng, bool deterministic) const {
    Sample s;
    s.choices.resize(num_md_);
    s.cont.assign(num_md_, {0.0, 0.0, 0.0, 0.0});
    const Mat probs = discrete_probs(obs);

    for (std::size_t n = 0; n < num_md_; ++n) {
        std::size_t choice = 0;
        if (deterministic) {
            double best = probs.at(n, 0);
            for (std::size_t a = 1; a < num_choices_; ++a)
                if (probs.at(n, a) > best) {
                    best = probs.at(n, a);
                    choice = a;
                }
        } else {
            const double u = rng.uniform01();
            double acc = 0.0;
            for (std::size_t a = 0; a < num_choices_; ++a) {
                acc += probs.at(n, a);
                if (u < acc || a + 1 == num_choices_) {
                    choice = a;
                    break;
                }
            }
        }
        s.choices[n] = choice;
        s.logp += std::log(std::max(probs.at(n, choice), 1e-300));

        const Vec means = cont_means(obs, n, choice);
        auto draw = [&](std::size_t dim) {
            const double sd = sigma(dim);
            const double z = deterministic ? means[dim] : means[dim] + sd * rng.normal();
            const double lo = bound_lo(n, dim);
            const double hi = bound_hi(n, dim);
            s.cont[n][dim] = squash(z, lo, hi);
            s.logp += squashed_log_density(z, means[dim], sd, lo, hi);
        };
        if (choice == 0)
            for (std::size_t dim : local_dims()) draw(dim);
        else
            for (std::size_t dim : offload_dims()) draw(dim);
    }
    return s;
}

ParamAction PolicyNets::to_param_action(const Sample& s) const {
    ParamAction a(num_md_);
    for (std::size_t n = 0; n < num_md_; ++n) {
        a[n].choice = s.choices[n];
        a[n].power_w = s.cont[n][cont_power];
        a[n].bandwidth_hz = s.cont[n][cont_bandwidth];
        a[n].cpu_hz = s.cont[n][cont_cpu];
        a[n].hash_rate = s.cont[n][cont_hash];
    }
    return a;
}

double PolicyNets::log_prob_discrete(const SampledStep& step) const {
    const Mat probs = discrete_probs(step.obs);
    double lp = 0.0;
    for (std::size_t n = 0; n < num_md_; ++n)
        lp += std::log(std::max(probs.at(n, step.choices[n]), 1e-300));
    return lp;
}

double PolicyNets::log_prob_continuous(const SampledStep& step) const {
    double lp = 0.0;
    for (std::size_t n = 0; n < num_md_; ++n) {
        const std::size_t choice = step.choices[n];
        const Vec means = cont_means(step.obs, n, choice);
        auto add = [&](std::size_t dim) {
            const double lo = bound_lo(n, dim);
            const double hi = bound_hi(n, dim);
            const double z = unsquash(step.cont[n][dim], lo, hi);
            lp += squashed_log_density(z, means[dim], sigma(dim), lo, hi);
        };
        if (choice == 0)
            for (std::size_t dim : local_dims()) add(dim);
        else
            for (std::size_t dim : offload_dims()) add(dim);
    }
    return lp;
}

double PolicyNets::log_prob(const SampledStep& step) const {
    return log_prob_discrete(step) + log_prob_continuous(step);
}

void PolicyNets::log_prob_grad(const SampledStep& step, double coef, Vec& grad) const {
    if (grad.size() != theta_.size()) throw std::invalid_argument("log_prob_grad: grad size mismatch");

    // Discrete head: d log p / d logit = coef * (onehot - probs), per MD.
    Mlp::Cache dcache;
    const Vec logits =
        discrete_net_.forward(theta_.data() + discrete_offset_, step.obs, &dcache);
    Vec dlogits(logits.size(), 0.0);
    const Mat probs = discrete_probs(step.obs);
    for (std::size_t n = 0; n < num_md_; ++n)
        for (std::size_t a = 0; a < num_choices_; ++a)
            dlogits[n * num_choices_ + a] =
                coef * ((a == step.choices[n] ? 1.0 : 0.0) - probs.at(n, a));
    discrete_net_.backward(theta_.data() + discrete_offset_, dcache, dlogits,
                           grad.data() + discrete_offset_);

    // Continuous head, one backward pass per MD at its sampled choice.
    for (std::size_t n = 0; n < num_md_; ++n) {
        const std::size_t choice = step.choices[n];
        Mlp::Cache ccache;
        const Vec in = cont_input(step.obs, n, choice);
        const Vec means = cont_net_.forward(theta_.data() + cont_offset_, in, &ccache);
        Vec dmeans(kContDims, 0.0);
        auto add = [&](std::size_t dim) {
            const double lo = bound_lo(n, dim);
            const double hi = bound_hi(n, dim);
            const double z = unsquash(step.cont[n][dim], lo, hi);
            const double sd = sigma(dim);
            const double diff = z - means[dim];
            dmeans[dim] = coef * diff / (sd * sd);
            const double ls = theta_[log_std_offset_ + dim];
            if (ls > kLogStdMin && ls < kLogStdMax)
                grad[log_std_offset_ + dim] += coef * (diff * diff / (sd * sd) - 1.0);
        };
        if (choice == 0)
            for (std::size_t dim : local_dims()) add(dim);
        else
            for (std::size_t dim : offload_dims()) add(dim);
        cont_net_.backward(theta_.data() + cont_offset_, ccache, dmeans,
                           grad.data() + cont_offset_);
    }
}

Mat PolicyNets::cont_batch_input(const Vec& obs) const {
    const std::size_t in_dim = obs_dim_ + num_md_ + num_choices_;
    Mat x(num_md_ * num_choices_, in_dim, 0.0);
    for (std::size_t n = 0; n < num_md_; ++n) {
        for (std::size_t a = 0; a < num_choices_; ++a) {
            double* row = x.data.data() + (n * num_choices_ + a) * in_dim;
            for (std::size_t i = 0; i < obs_dim_; ++i) row[i] = obs[i];
            row[obs_dim_ + n] = 1.0;
            row[obs_dim_ + num_md_ + a] = 1.0;
        }
    }
    return x;
}

DistCache PolicyNets::dist_cache(const Trajectory& traj) const {
    DistCache c;
    c.probs.reserve(traj.size());
    c.means.reserve(traj.size());
    for (std::size_t d = 0; d < kContDims; ++d) c.sigma[d] = sigma(d);
    for (const auto& step : traj) {
        c.probs.push_back(discrete_probs(step.obs));
        const Mat mu = cont_net_.forward_batch(theta_.data() + cont_offset_,
                                               cont_batch_input(step.obs));
        std::vector<Mat> per_md;
        per_md.reserve(num_md_);
        for (std::size_t n = 0; n < num_md_; ++n) {
            Mat m(num_choices_, kContDims);
            for (std::size_t a = 0; a < num_choices_; ++a)
                for (std::size_t d = 0; d < kContDims; ++d)
                    m.at(a, d) = mu.at(n * num_choices_ + a, d);
            per_md.push_back(std::move(m));
        }
        c.means.push_back(std::move(per_md));
    }
    return c;
}

double PolicyNets::kl(const DistCache& old_cache, const Trajectory& traj,
                      KlWeighting weighting) const {
    if (old_cache.probs.size() != traj.size()) throw std::invalid_argument("kl: cache/traj mismatch");
    double total = 0.0;
    for (std::size_t t = 0; t < traj.size(); ++t) {
        const Mat probs_new = discrete_probs(traj[t].obs);
        const Mat mu_new = cont_net_.forward_batch(theta_.data() + cont_offset_,
                                                   cont_batch_input(traj[t].obs));
        for (std::size_t n = 0; n < num_md_; ++n) {
            Vec po(num_choices_), pn(num_choices_);
            for (std::size_t a = 0; a < num_choices_; ++a) {
                po[a] = old_cache.probs[t].at(n, a);
                pn[a] = probs_new.at(n, a);
            }
            total += categorical_kl(po, pn);
            for (std::size_t a = 0; a < num_choices_; ++a) {
                const double w = weighting == KlWeighting::exact
                                     ? po[a]
                                     : -std::log(std::max(po[a], 1e-300));
                if (w == 0.0) continue;
                const std::size_t row = n * num_choices_ + a;
                double klc = 0.0;
                auto add = [&](std::size_t dim) {
                    klc += gaussian_kl(old_cache.means[t][n].at(a, dim), old_cache.sigma[dim],
                                       mu_new.at(row, dim), sigma(dim));
                };
                if (a == 0)
                    for (std::size_t dim : local_dims()) add(dim);
                else
                    for (std::size_t dim : offload_dims()) add(dim);
                total += w * klc;
            }
        }
    }
    return total / static_cast<double>(traj.size());
}

Vec PolicyNets::kl_grad(const DistCache& old_cache, const Trajectory& traj,
                        KlWeighting weighting) const {
    Vec grad(theta_.size(), 0.0);
    const double inv_t = 1.0 / static_cast<double>(traj.size());
    for (std::size_t t = 0; t < traj.size(); ++t) {
        // Discrete part: d KL(p_old || p_new) / d logit_new = p_new - p_old.
        Mlp::Cache dcache;
        const Vec logits =
            discrete_net_.forward(theta_.data() + discrete_offset_, traj[t].obs, &dcache);
        Mat probs_new(num_md_, num_choices_);
        for (std::size_t n = 0; n < num_md_; ++n) {
            double mx = logits[n * num_choices_];
            for (std::size_t a = 0; a < num_choices_; ++a)
                mx = std::max(mx, logits[n * num_choices_ + a]);
            double z = 0.0;
            for (std::size_t a = 0; a < num_choices_; ++a) {
                probs_new.at(n, a) = std::exp(logits[n * num_choices_ + a] - mx);
                z += probs_new.at(n, a);
            }
            for (std::size_t a = 0; a < num_choices_; ++a) probs_new.at(n, a) /= z;
        }
        Vec dlogits(num_md_ * num_choices_, 0.0);
        for (std::size_t n = 0; n < num_md_; ++n)
            for (std::size_t a = 0; a < num_choices_; ++a)
                dlogits[n * num_choices_ + a] =
                    inv_t * (probs_new.at(n, a) - old_cache.probs[t].at(n, a));
        discrete_net_.backward(theta_.data() + discrete_offset_, dcache, dlogits,
                               grad.data() + discrete_offset_);

        // Continuous part: one batched pass over every (md, choice) pair.
        Mlp::BatchCache ccache;
        const Mat mu_new = cont_net_.forward_batch(theta_.data() + cont_offset_,
                                                   cont_batch_input(traj[t].obs), &ccache);
        Mat dmu(num_md_ * num_choices_, kContDims, 0.0);
        for (std::size_t n = 0; n < num_md_; ++n) {
            for (std::size_t a = 0; a < num_choices_; ++a) {
                const double po = old_cache.probs[t].at(n, a);
                const double w =
                    weighting == KlWeighting::exact ? po : -std::log(std::max(po, 1e-300));
                if (w == 0.0) continue;
                const std::size_t row = n * num_choices_ + a;
                auto add = [&](std::size_t dim) {
                    const double mo = old_cache.means[t][n].at(a, dim);
                    const double so = old_cache.sigma[dim];
                    const double sn = sigma(dim);
                    dmu.at(row, dim) = inv_t * w * (mu_new.at(row, dim) - mo) / (sn * sn);
                    const double ls = theta_[log_std_offset_ + dim];
                    if (ls > kLogStdMin && ls < kLogStdMax) {
                        const double dm = mo - mu_new.at(row, dim);
                        grad[log_std_offset_ + dim] +=
                            inv_t * w * (1.0 - (so * so + dm * dm) / (sn * sn));
                    }
                };
                if (a == 0)
                    for (std::size_t dim : local_dims()) add(dim);
                else
                    for (std::size_t dim : offload_dims()) add(dim);
            }
        }
        cont_net_.backward_batch(theta_.data() + cont_offset_, ccache, dmu,
                                 grad.data() + cont_offset_);
    }
    return grad;
}

Vec ObsScaler::apply(const Vec& raw) const {
    if (raw.size() != scale.size()) throw std::invalid_argument("ObsScaler: dimension mismatch");
    Vec out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] * scale[i];
    return out;
}

ObsScaler ObsScaler::for_params(const SystemParams& params) {
    ObsScaler s;
    const std::size_t n = params.num_md;
    const std::size_t g = params.channels;
    double max_points = 1.0, max_cpu = 1.0;
    for (double v : params.md_data_points) max_points = std::max(max_points, v);
    for (double v : params.md_max_cpu_hz) max_cpu = std::max(max_cpu, v);
    s.scale.reserve(n + 2 * n * g + 2 * n);
    for (std::size_t i = 0; i < n; ++i) s.scale.push_back(1.0 / max_points);
    for (std::size_t i = 0; i < n * g; ++i) s.scale.push_back(1.0);
    for (std::size_t i = 0; i < n * g; ++i) s.scale.push_back(1.0 / params.max_bandwidth_hz);
    for (std::size_t i = 0; i < n; ++i) s.scale.push_back(1.0 / max_cpu);
    for (std::size_t i = 0; i < n; ++i) s.scale.push_back(1.0 / params.hash_cap);
    return s;
}

}  // namespace bflsim::drl
