#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

std::vector<Real> softmax(const std::vector<double>& x, Real temperature) {
    Real hi = -INFINITY;
    for (double v : x) hi = std::max<Real>(hi, v / temperature);
    std::vector<Real> e;
    Real sum = 0;
    for (double v : x) {
        e.push_back(std::exp(v / temperature - hi));
        sum += e.back();
    }
    for (auto& v : e) v /= sum;
    return e;
}

Real cross_entropy(const std::vector<double>& logits, std::size_t gold) {
    return -std::log(softmax(logits)[gold]);
}

Real mse(const std::vector<double>& s, const std::vector<double>& t) {
    Real sum = 0;
    for (std::size_t i = 0; i < s.size(); ++i) sum += (Real(s[i]) - t[i]) * (Real(s[i]) - t[i]);
    return sum / s.size();
}

Real kld(const std::vector<double>& s, const std::vector<double>& t, Real temperature) {
    const auto p = softmax(t, temperature);
    const auto q = softmax(s, temperature);
    Real sum = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0) sum += p[i] * (std::log(p[i]) - std::log(q[i]));
    }
    return temperature * temperature * sum;
}

Real distill(const std::vector<double>& s, const std::vector<double>& t, std::size_t gold, Real alpha,
             Real temperature, bool use_kld, bool mse_scaled) {
    Real soft = 0;
    if (use_kld) {
        soft = kld(s, t, temperature);
    } else if (mse_scaled) {
        std::vector<double> ss, ts;
        for (double v : s) ss.push_back(static_cast<double>(v / temperature));
        for (double v : t) ts.push_back(static_cast<double>(v / temperature));
        soft = mse(ss, ts);
    } else {
        soft = mse(s, t);
    }
    return (1 - alpha) * cross_entropy(s, gold) + alpha * soft;
}

std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double step) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + step;
        const double up = f(x);
        x[i] = keep - step;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2 * step);
    }
    return g;
}

Real score(const DenseModel& m, const std::vector<std::int32_t>& ids) {
    std::vector<Real> pooled(m.d, 0);
    std::size_t count = 0;
    for (auto id : ids) {
        if (id == 0) continue;
        ++count;
        for (std::size_t j = 0; j < m.d; ++j) pooled[j] += m.embedding[static_cast<std::size_t>(id) * m.d + j];
    }
    for (auto& v : pooled) v /= count;

    std::vector<Real> act = pooled;
    std::size_t in = m.d;
    for (std::size_t l = 0; l <= m.layers; ++l) {
        const std::size_t out = l == m.layers ? 1 : m.h;
        std::vector<Real> next(out, 0);
        for (std::size_t o = 0; o < out; ++o) {
            Real z = m.biases[l][o];
            for (std::size_t i = 0; i < in; ++i) z += act[i] * m.weights[l][i * out + o];
            next[o] = (l == m.layers || z > 0) ? z : 0;
        }
        act = next;
        in = out;
    }
    return act[0];
}

void AdamW::step(std::vector<double>& p, const std::vector<double>& g) {
    if (m.empty()) {
        m.assign(p.size(), 0);
        v.assign(p.size(), 0);
    }
    ++t;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = p[i] - lr * wd * p[i];
        m[i] = b1 * m[i] + (1 - b1) * g[i];
        v[i] = b2 * v[i] + (1 - b2) * Real(g[i]) * g[i];
        const Real mh = m[i] / (1 - std::pow(Real(b1), Real(t)));
        const Real vh = v[i] / (1 - std::pow(Real(b2), Real(t)));
        p[i] = static_cast<double>(p[i] - lr * mh / (std::sqrt(vh) + eps));
    }
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::size_t jaccard_pairs(const std::vector<std::set<std::string>>& a, const std::vector<std::set<std::string>>& b,
                          double tau) {
    std::size_t count = 0;
    for (const auto& x : a) {
        for (const auto& y : b) {
            std::size_t inter = 0;
            for (const auto& w : x) inter += y.count(w);
            const std::size_t uni = x.size() + y.size() - inter;
            const double j = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
            if (j >= tau) ++count;
        }
    }
    return count;
}

Summary summarise(const std::vector<double>& xs) {
    Summary s;
    s.n = xs.size();
    for (double x : xs) s.mean += x;
    s.mean /= s.n;
    if (s.n > 1) {
        Real ss = 0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / (s.n - 1));
    }
    return s;
}

} // namespace oracle
