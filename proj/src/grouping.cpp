#include "gal/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "gal/errors.hpp"

namespace gal {

std::vector<std::vector<int>> Grouping::groups() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(L));
    for (std::size_t a = 0; a < assignment.size(); ++a) {
        int g = assignment[a];
        out[static_cast<std::size_t>(g)].push_back(static_cast<int>(a));
    }
    return out;
}

void Grouping::validate() const {
    if (L <= 0) throw InputError("grouping: L must be positive");
    std::vector<int> sizes(static_cast<std::size_t>(L), 0);
    for (int g : assignment) {
        if (g < 0 || g >= L) throw InputError("grouping: assignment outside [0, L)");
        ++sizes[static_cast<std::size_t>(g)];
    }
    for (int s : sizes)
        if (s == 0) throw InputError("grouping: empty group");
}

Matrix affinity_from_delta(const Matrix& delta) {
    if (delta.rows() != delta.cols()) throw DimensionError("affinity_from_delta: matrix must be square");
    constexpr double kEps = 1e-6;
    double dmax = 0.0;
    for (double v : delta.raw()) dmax = std::max(dmax, v);
    Matrix a(delta.rows(), delta.cols());
    for (std::size_t i = 0; i < delta.rows(); ++i)
        for (std::size_t j = 0; j < delta.cols(); ++j)
            a(i, j) = i == j ? dmax + kEps : (dmax - delta(i, j)) + kEps;
    return a;
}

EigenResult jacobi_eigen(const Matrix& sym, double tol, int max_sweeps) {
    if (sym.rows() != sym.cols()) throw DimensionError("jacobi_eigen: matrix must be square");
    std::size_t n = sym.rows();
    Matrix a = sym;
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) < tol) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (std::fabs(apq) < tol * 1e-3) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (diag[x] != diag[y]) return diag[x] > diag[y];
        return x < y;
    });

    EigenResult res;
    res.values.resize(n);
    res.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        res.values[j] = diag[order[j]];
        for (std::size_t i = 0; i < n; ++i) res.vectors(i, j) = v(i, order[j]);
    }
    return res;
}

std::vector<int> kmeans(const Matrix& points, int k, Rng& rng, int max_iter) {
    std::size_t n = points.rows(), dim = points.cols();
    if (k <= 0 || static_cast<std::size_t>(k) > n)
        throw InputError("kmeans: k must be in [1, #points]");

    auto dist2 = [&](std::size_t i, const double* center) {
        const double* p = points.row(i);
        double s = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            double diff = p[d] - center[d];
            s += diff * diff;
        }
        return s;
    };

    // k-means++ seeding
    Matrix centers(static_cast<std::size_t>(k), dim);
    std::size_t first = rng.index(n);
    for (std::size_t d = 0; d < dim; ++d) centers(0, d) = points(first, d);
    std::vector<double> best_d2(n, 0.0);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (int j = 0; j < c; ++j)
                best = std::min(best, dist2(i, centers.row(static_cast<std::size_t>(j))));
            best_d2[i] = best;
            total += best;
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.index(n);
        } else {
            double r = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += best_d2[i];
                if (r < acc) {
                    pick = i;
                    break;
                }
            }
        }
        for (std::size_t d = 0; d < dim; ++d) centers(static_cast<std::size_t>(c), d) = points(pick, d);
    }

    std::vector<int> labels(n, -1);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double bd = dist2(i, centers.row(0));
            for (int c = 1; c < k; ++c) {
                double d2 = dist2(i, centers.row(static_cast<std::size_t>(c)));
                if (d2 < bd) {
                    bd = d2;
                    best = c;
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        // repair empty clusters by stealing the farthest point
        std::vector<int> count(static_cast<std::size_t>(k), 0);
        for (int l : labels) ++count[static_cast<std::size_t>(l)];
        for (int c = 0; c < k; ++c) {
            if (count[static_cast<std::size_t>(c)] > 0) continue;
            std::size_t far = 0;
            double fd = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (count[static_cast<std::size_t>(labels[i])] <= 1) continue;
                double d2 = dist2(i, centers.row(static_cast<std::size_t>(labels[i])));
                if (d2 > fd) {
                    fd = d2;
                    far = i;
                }
            }
            --count[static_cast<std::size_t>(labels[far])];
            labels[far] = c;
            ++count[static_cast<std::size_t>(c)];
            changed = true;
        }
        if (!changed && iter > 0) break;
        // recompute centers
        centers = Matrix(static_cast<std::size_t>(k), dim);
        std::vector<double> sz(static_cast<std::size_t>(k), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            sz[static_cast<std::size_t>(labels[i])] += 1.0;
            for (std::size_t d = 0; d < dim; ++d)
                centers(static_cast<std::size_t>(labels[i]), d) += points(i, d);
        }
        for (int c = 0; c < k; ++c)
            if (sz[static_cast<std::size_t>(c)] > 0.0)
                for (std::size_t d = 0; d < dim; ++d)
                    centers(static_cast<std::size_t>(c), d) /= sz[static_cast<std::size_t>(c)];
    }
    return labels;
}

Grouping spectral_cocluster(const Matrix& affinity, int L, std::uint64_t seed) {
    if (affinity.rows() != affinity.cols()) throw DimensionError("spectral_cocluster: matrix must be square");
    std::size_t D = affinity.rows();
    if (L < 1 || static_cast<std::size_t>(L) > D)
        throw InputError("spectral_cocluster: L must be in [1, D]");
    for (double v : affinity.raw())
        if (v < 0.0) throw InputError("spectral_cocluster: affinity must be non-negative");

    Grouping g;
    g.assignment.assign(D, 0);
    g.L = L;
    if (L == 1) return g;
    if (static_cast<std::size_t>(L) == D) {
        for (std::size_t a = 0; a < D; ++a) g.assignment[a] = static_cast<int>(a);
        return g;
    }

    std::vector<double> d1(D, 0.0), d2(D, 0.0);
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j) {
            d1[i] += affinity(i, j);
            d2[j] += affinity(i, j);
        }
    for (std::size_t i = 0; i < D; ++i)
        if (d1[i] <= 0.0 || d2[i] <= 0.0)
            throw InputError("spectral_cocluster: zero row/column sum in affinity");

    Matrix an(D, D);
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j)
            an(i, j) = affinity(i, j) / std::sqrt(d1[i] * d2[j]);

    Matrix m = matmul_tn(an, an);  // An^T An; eigenvalues are squared singular values
    EigenResult eig = jacobi_eigen(m);

    int l = static_cast<int>(std::ceil(std::log2(static_cast<double>(L))));
    l = std::max(l, 1);
    l = std::min<std::size_t>(static_cast<std::size_t>(l), D - 1);
    Matrix embedding(D, static_cast<std::size_t>(l));
    for (std::size_t i = 0; i < D; ++i) {
        double scale = 1.0 / std::sqrt(d1[i]);
        for (int j = 0; j < l; ++j)
            embedding(i, static_cast<std::size_t>(j)) = scale * eig.vectors(i, static_cast<std::size_t>(j + 1));
    }

    Rng rng(seed);
    std::vector<int> labels = kmeans(embedding, L, rng);

    // canonicalize group ids by first appearance so equal inputs yield equal files
    std::vector<int> remap(static_cast<std::size_t>(L), -1);
    int next = 0;
    for (int lab : labels)
        if (remap[static_cast<std::size_t>(lab)] < 0) remap[static_cast<std::size_t>(lab)] = next++;
    for (std::size_t a = 0; a < D; ++a) g.assignment[a] = remap[static_cast<std::size_t>(labels[a])];
    g.validate();
    return g;
}

Grouping load_grouping(const std::string& path, std::size_t num_attributes) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open grouping file: " + path);
    std::vector<int> assignment(num_attributes, -1);
    std::map<int, bool> seen_groups;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos)
            throw FormatError("grouping file line " + std::to_string(line_no) + ": missing ':'");
        int gid;
        try {
            gid = std::stoi(line.substr(0, colon));
        } catch (const std::exception&) {
            throw FormatError("grouping file line " + std::to_string(line_no) + ": bad group id");
        }
        if (gid < 0) throw FormatError("grouping file line " + std::to_string(line_no) + ": negative group id");
        seen_groups[gid] = true;
        std::istringstream rest(line.substr(colon + 1));
        int attr;
        while (rest >> attr) {
            if (attr < 0 || static_cast<std::size_t>(attr) >= num_attributes)
                throw FormatError("grouping file line " + std::to_string(line_no) + ": attribute " +
                                  std::to_string(attr) + " out of range");
            if (assignment[static_cast<std::size_t>(attr)] != -1)
                throw FormatError("grouping file line " + std::to_string(line_no) + ": attribute " +
                                  std::to_string(attr) + " listed twice");
            assignment[static_cast<std::size_t>(attr)] = gid;
        }
        if (!rest.eof())
            throw FormatError("grouping file line " + std::to_string(line_no) + ": non-numeric attribute index");
    }
    for (std::size_t a = 0; a < num_attributes; ++a)
        if (assignment[a] == -1)
            throw FormatError("grouping file: attribute " + std::to_string(a) + " missing");
    // compact group ids to 0..L-1 preserving numeric order
    std::map<int, int> remap;
    for (auto& [gid, _] : seen_groups) {
        int next = static_cast<int>(remap.size());
        remap[gid] = next;
    }
    Grouping g;
    g.L = static_cast<int>(remap.size());
    g.assignment.resize(num_attributes);
    for (std::size_t a = 0; a < num_attributes; ++a) g.assignment[a] = remap[assignment[a]];
    g.validate();
    return g;
}

void save_grouping(const Grouping& g, const std::string& path) {
    g.validate();
    std::ofstream out(path);
    if (!out) throw InputError("cannot write grouping file: " + path);
    auto groups = g.groups();
    for (int i = 0; i < g.L; ++i) {
        out << i << ":";
        for (int a : groups[static_cast<std::size_t>(i)]) out << " " << a;
        out << "\n";
    }
    if (!out) throw InputError("failed writing grouping file: " + path);
}

} // namespace gal
