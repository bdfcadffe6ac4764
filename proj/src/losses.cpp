#include "gal/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gal/errors.hpp"

namespace gal {

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "ale") return LossKind::ale;
    if (s == "devise") return LossKind::devise;
    if (s == "sje") return LossKind::sje;
    if (s == "softmax") return LossKind::softmax;
    throw InputError("unknown loss '" + s + "' (expected ale|devise|sje|softmax)");
}

std::string to_string(LossKind k) {
    switch (k) {
        case LossKind::ale: return "ale";
        case LossKind::devise: return "devise";
        case LossKind::sje: return "sje";
        case LossKind::softmax: return "softmax";
    }
    return "?";
}

std::vector<double> class_scores(const std::vector<double>& attr_scores, const Matrix& phi,
                                 const std::vector<int>& class_set) {
    if (attr_scores.size() != phi.cols())
        throw DimensionError("class_scores: attribute count mismatch");
    std::vector<double> out;
    out.reserve(class_set.size());
    for (int c : class_set) {
        if (c < 0 || static_cast<std::size_t>(c) >= phi.rows())
            throw InputError("class_scores: class id " + std::to_string(c) + " outside attribute matrix");
        const double* r = phi.row(static_cast<std::size_t>(c));
        double s = 0.0;
        for (std::size_t a = 0; a < attr_scores.size(); ++a) s += attr_scores[a] * r[a];
        out.push_back(s);
    }
    return out;
}

namespace {
void check_label(const std::vector<double>& scores, std::size_t y) {
    if (y >= scores.size()) throw InputError("loss: label index outside candidate set");
}
} // namespace

LossResult loss_devise(const std::vector<double>& scores, std::size_t y, double margin) {
    check_label(scores, y);
    LossResult r;
    r.grad.assign(scores.size(), 0.0);
    for (std::size_t c = 0; c < scores.size(); ++c) {
        if (c == y) continue;
        double h = margin - scores[y] + scores[c];
        if (h > 0.0) {
            r.loss += h;
            r.grad[c] += 1.0;
            r.grad[y] -= 1.0;
        }
    }
    return r;
}

LossResult loss_sje(const std::vector<double>& scores, std::size_t y, double margin) {
    check_label(scores, y);
    LossResult r;
    r.grad.assign(scores.size(), 0.0);
    double best = 0.0;
    std::size_t best_c = scores.size();
    for (std::size_t c = 0; c < scores.size(); ++c) {
        if (c == y) continue;
        double h = margin + scores[c] - scores[y];
        if (h > best) {  // strict: keeps the first index among exact ties
            best = h;
            best_c = c;
        }
    }
    if (best_c != scores.size()) {
        r.loss = best;
        r.grad[best_c] = 1.0;
        r.grad[y] = -1.0;
    }
    return r;
}

LossResult loss_ale(const std::vector<double>& scores, std::size_t y, double margin) {
    check_label(scores, y);
    LossResult r;
    r.grad.assign(scores.size(), 0.0);
    double hinge_sum = 0.0;
    std::size_t violators = 0;
    for (std::size_t c = 0; c < scores.size(); ++c) {
        if (c == y) continue;
        double h = margin + scores[c] - scores[y];
        if (h > 0.0) {
            hinge_sum += h;
            ++violators;
            r.grad[c] = 1.0;  // scaled below
        }
    }
    if (violators == 0) return r;
    double beta = 0.0;
    for (std::size_t i = 1; i <= violators; ++i) beta += 1.0 / static_cast<double>(i);
    double w = beta / static_cast<double>(violators);
    r.loss = w * hinge_sum;
    for (std::size_t c = 0; c < scores.size(); ++c) r.grad[c] *= w;
    r.grad[y] = -w * static_cast<double>(violators);
    return r;
}

LossResult loss_softmax_ce(const std::vector<double>& scores, std::size_t y) {
    check_label(scores, y);
    LossResult r;
    double mx = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    r.grad.assign(scores.size(), 0.0);
    for (std::size_t c = 0; c < scores.size(); ++c) {
        r.grad[c] = std::exp(scores[c] - mx);
        sum += r.grad[c];
    }
    for (std::size_t c = 0; c < scores.size(); ++c) r.grad[c] /= sum;
    r.loss = -std::log(r.grad[y]);
    r.grad[y] -= 1.0;
    return r;
}

LossResult loss_balanced_bce(const std::vector<double>& probs, const std::vector<std::uint8_t>& targets) {
    if (probs.size() != targets.size()) throw DimensionError("balanced bce: length mismatch");
    constexpr double kClamp = 1e-7;
    std::size_t n_pos = 0;
    for (auto t : targets) n_pos += (t != 0);
    std::size_t n_neg = targets.size() - n_pos;
    LossResult r;
    r.grad.assign(probs.size(), 0.0);
    double wp = n_pos > 0 ? 1.0 / (2.0 * static_cast<double>(n_pos)) : 0.0;
    double wn = n_neg > 0 ? 1.0 / (2.0 * static_cast<double>(n_neg)) : 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        double p = std::clamp(probs[i], kClamp, 1.0 - kClamp);
        bool clamped = probs[i] < kClamp || probs[i] > 1.0 - kClamp;
        if (targets[i] != 0) {
            r.loss -= wp * std::log(p);
            r.grad[i] = clamped ? 0.0 : -wp / p;
        } else {
            r.loss -= wn * std::log(1.0 - p);
            r.grad[i] = clamped ? 0.0 : wn / (1.0 - p);
        }
    }
    return r;
}

} // namespace gal
