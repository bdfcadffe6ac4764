#include "gal/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "gal/errors.hpp"
#include "gal/rng.hpp"

namespace gal {

void SplitDef::validate(std::size_t num_classes) const {
    if (train_classes.empty()) throw InputError("split: train class set is empty");
    if (test_classes.empty()) throw InputError("split: test class set is empty");
    std::set<int> seen;
    auto check = [&](const std::vector<int>& v, const char* name) {
        for (int c : v) {
            if (c < 0 || static_cast<std::size_t>(c) >= num_classes)
                throw InputError(std::string("split: ") + name + " class " + std::to_string(c) +
                                 " out of range (C = " + std::to_string(num_classes) + ")");
            if (!seen.insert(c).second)
                throw InputError(std::string("split: class ") + std::to_string(c) +
                                 " appears in more than one set");
        }
    };
    check(train_classes, "train");
    check(val_classes, "val");
    check(test_classes, "test");
}

std::vector<int> SplitDef::seen_classes() const {
    std::vector<int> out = train_classes;
    out.insert(out.end(), val_classes.begin(), val_classes.end());
    return out;
}

void Dataset::validate() const {
    attributes.validate();
    if (features.rows() != labels.size())
        throw InputError("dataset: features rows " + std::to_string(features.rows()) +
                         " != label count " + std::to_string(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= attributes.num_classes)
            throw InputError("dataset: label " + std::to_string(labels[i]) + " at line " +
                             std::to_string(i + 1) + " out of range");
    split.validate(attributes.num_classes);
    features.check_finite("dataset features");
}

AttributeMatrix make_attribute_matrix(Matrix values) {
    AttributeMatrix a;
    a.num_classes = values.rows();
    a.num_attributes = values.cols();
    a.binarized = binarize_attributes(values);
    a.values = std::move(values);
    return a;
}

namespace {

constexpr char kFeatureMagic[4] = {'G', 'A', 'L', 'F'};
constexpr std::uint32_t kFeatureVersion = 1;

template <typename T>
void read_raw(std::ifstream& in, T& out, const std::string& path, std::size_t offset) {
    in.read(reinterpret_cast<char*>(&out), sizeof(T));
    if (!in)
        throw FormatError(path + ": truncated at byte offset " + std::to_string(offset));
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<int> parse_id_list(const std::string& text, const std::string& what) {
    std::vector<int> out;
    std::istringstream ss(text);
    int v;
    while (ss >> v) out.push_back(v);
    std::string leftover;
    if (ss.clear(), ss >> leftover)
        throw FormatError(what + ": non-numeric class id '" + leftover + "'");
    return out;
}

Matrix load_features(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kFeatureMagic, 4) != 0)
        throw FormatError(path + ": bad magic (expected GALF)");
    std::uint32_t version = 0;
    read_raw(in, version, path, 4);
    if (version != kFeatureVersion)
        throw FormatError(path + ": unsupported version " + std::to_string(version));
    std::uint64_t n = 0, d = 0;
    read_raw(in, n, path, 8);
    read_raw(in, d, path, 16);
    Matrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
    std::vector<float> rowbuf(static_cast<std::size_t>(d));
    std::size_t offset = 24;
    for (std::uint64_t i = 0; i < n; ++i) {
        in.read(reinterpret_cast<char*>(rowbuf.data()),
                static_cast<std::streamsize>(sizeof(float) * d));
        if (!in) throw FormatError(path + ": truncated at byte offset " + std::to_string(offset));
        offset += sizeof(float) * static_cast<std::size_t>(d);
        double* dst = m.row(static_cast<std::size_t>(i));
        for (std::uint64_t j = 0; j < d; ++j) dst[j] = static_cast<double>(rowbuf[j]);
    }
    in.peek();
    if (!in.eof()) throw FormatError(path + ": trailing bytes after matrix data");
    return m;
}

void save_features(const Matrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out.write(kFeatureMagic, 4);
    std::uint32_t version = kFeatureVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    std::uint64_t n = m.rows(), d = m.cols();
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(&d), sizeof(d));
    std::vector<float> rowbuf(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* src = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) rowbuf[j] = static_cast<float>(src[j]);
        out.write(reinterpret_cast<const char*>(rowbuf.data()),
                  static_cast<std::streamsize>(sizeof(float) * m.cols()));
    }
    if (!out) throw InputError("failed writing " + path);
}

std::vector<int> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::vector<int> labels;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty()) continue;
        try {
            std::size_t used = 0;
            int v = std::stoi(t, &used);
            if (used != t.size()) throw std::invalid_argument("trailing");
            labels.push_back(v);
        } catch (const std::exception&) {
            throw FormatError(path + " line " + std::to_string(line_no) + ": bad class id '" + t + "'");
        }
    }
    return labels;
}

Matrix load_attribute_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw FormatError(path + ": missing header");
    std::size_t D = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
    if (header.rfind("attr_0", 0) != 0)
        throw FormatError(path + ": header must start with attr_0");
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(trim(cell)));
            } catch (const std::exception&) {
                throw FormatError(path + " line " + std::to_string(line_no) + ": bad value '" + cell + "'");
            }
        }
        if (row.size() != D)
            throw FormatError(path + " line " + std::to_string(line_no) + ": expected " +
                              std::to_string(D) + " values, got " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError(path + ": no data rows");
    Matrix m(rows.size(), D);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < D; ++j) m(i, j) = rows[i][j];
    return m;
}

void save_attribute_values(const Matrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << "attr_" << j;
    out << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
        out << "\n";
    }
    if (!out) throw InputError("failed writing " + path);
}

} // namespace

SplitDef load_split(const std::string& path, std::size_t num_classes) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    SplitDef split;
    bool have_train = false, have_val = false, have_test = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto colon = t.find(':');
        if (colon == std::string::npos)
            throw FormatError(path + " line " + std::to_string(line_no) + ": expected 'name: ids'");
        std::string name = trim(t.substr(0, colon));
        std::string ids = t.substr(colon + 1);
        if (name == "train") {
            split.train_classes = parse_id_list(ids, path);
            have_train = true;
        } else if (name == "val") {
            split.val_classes = parse_id_list(ids, path);
            have_val = true;
        } else if (name == "test") {
            split.test_classes = parse_id_list(ids, path);
            have_test = true;
        } else {
            throw FormatError(path + " line " + std::to_string(line_no) + ": unknown set '" + name + "'");
        }
    }
    if (!have_train || !have_val || !have_test)
        throw FormatError(path + ": needs train:, val: and test: lines");
    split.validate(num_classes);
    return split;
}

void save_split(const SplitDef& split, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    auto emit = [&](const char* name, const std::vector<int>& v) {
        out << name << ":";
        for (int c : v) out << " " << c;
        out << "\n";
    };
    emit("train", split.train_classes);
    emit("val", split.val_classes);
    emit("test", split.test_classes);
    if (!out) throw InputError("failed writing " + path);
}

Dataset load_dataset(const std::string& dir) {
    Dataset ds;
    ds.features = load_features(dir + "/features.bin");
    ds.labels = load_labels(dir + "/labels.txt");
    if (ds.features.rows() != ds.labels.size())
        throw InputError(dir + ": features.bin has " + std::to_string(ds.features.rows()) +
                         " rows but labels.txt has " + std::to_string(ds.labels.size()) + " entries");
    ds.attributes = make_attribute_matrix(load_attribute_values(dir + "/attributes.csv"));
    ds.split = load_split(dir + "/splits.txt", ds.attributes.num_classes);
    ds.validate();
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
    ds.validate();
    save_features(ds.features, dir + "/features.bin");
    std::ofstream labels(dir + "/labels.txt");
    if (!labels) throw InputError("cannot write " + dir + "/labels.txt");
    for (int y : ds.labels) labels << y << "\n";
    if (!labels) throw InputError("failed writing " + dir + "/labels.txt");
    save_attribute_values(ds.attributes.values, dir + "/attributes.csv");
    save_split(ds.split, dir + "/splits.txt");
}

namespace {

// Exact binary counts over a class subset, for O(D^2) objective evaluation.
struct SetStats {
    double n = 0.0;
    std::vector<double> cnt;   // per attribute
    Matrix cnt2;               // per attribute pair

    explicit SetStats(std::size_t D) : cnt(D, 0.0), cnt2(D, D) {}

    void add(const AttributeMatrix& attrs, int cls, double sign = 1.0) {
        auto c = static_cast<std::size_t>(cls);
        n += sign;
        std::size_t D = attrs.num_attributes;
        for (std::size_t a = 0; a < D; ++a) {
            if (!attrs.bin(c, a)) continue;
            cnt[a] += sign;
            for (std::size_t b = a; b < D; ++b)
                if (attrs.bin(c, b)) cnt2(a, b) += sign;
        }
    }

    double rho(std::size_t a, std::size_t b) const {
        double na = cnt[a], nb = cnt[b];
        if (n < 2.0 || na <= 0.0 || na >= n || nb <= 0.0 || nb >= n) return 0.0;
        double pab = (a <= b ? cnt2(a, b) : cnt2(b, a)) / n;
        double pa = na / n, pb = nb / n;
        // Clamped like the shift-module phi: rounding must not escape [-1, 1].
        return std::clamp((pab - pa * pb) / std::sqrt(pa * (1.0 - pa) * pb * (1.0 - pb)), -1.0,
                          1.0);
    }
};

double objective(const SetStats& held, const SetStats& test, std::size_t D) {
    double sum = 0.0;
    for (std::size_t a = 0; a < D; ++a)
        for (std::size_t b = a + 1; b < D; ++b)
            sum += delta_corr(held.rho(a, b), test.rho(a, b));
    return sum / (static_cast<double>(D) * (static_cast<double>(D) - 1.0) / 2.0);
}

std::size_t n_choose_k(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        if (r > (std::size_t(1) << 60) / (n - k + i)) return std::size_t(1) << 62;  // saturate
        r = r * (n - k + i) / i;
    }
    return r;
}

struct SubsetSearchResult {
    std::vector<int> subset;
    double value = -1.0;
};

// Exhaustive scan over all k-subsets of `pool` maximizing objective(rest, subset).
SubsetSearchResult exhaustive_best(const AttributeMatrix& attrs, const std::vector<int>& pool,
                                   std::size_t k, Rng& rng) {
    std::size_t D = attrs.num_attributes;
    SetStats all(D);
    for (int c : pool) all.add(attrs, c);
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    SubsetSearchResult best;
    std::vector<std::vector<int>> ties;
    while (true) {
        SetStats test(D), held = all;
        std::vector<int> subset(k);
        for (std::size_t i = 0; i < k; ++i) {
            subset[i] = pool[idx[i]];
            test.add(attrs, subset[i]);
            held.add(attrs, subset[i], -1.0);
        }
        double v = objective(held, test, D);
        if (v > best.value) {
            best.value = v;
            best.subset = subset;
            ties.clear();
            ties.push_back(subset);
        } else if (v == best.value) {
            ties.push_back(subset);
        }
        // advance combination
        std::size_t i = k;
        while (i > 0) {
            --i;
            if (idx[i] != i + pool.size() - k) break;
            if (i == 0) {
                if (ties.size() > 1) best.subset = ties[rng.index(ties.size())];
                return best;
            }
        }
        ++idx[i];
        for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

// Beam search: maintain up to `width` partial subsets; extend by one class at
// a time scoring the full objective; optional steepest-ascent swap refinement.
SubsetSearchResult beam_best(const AttributeMatrix& attrs, const std::vector<int>& pool,
                             std::size_t k, int width, bool swap_refine, Rng& rng) {
    std::size_t D = attrs.num_attributes;
    SetStats all(D);
    for (int c : pool) all.add(attrs, c);

    auto score = [&](const std::vector<int>& subset) {
        SetStats test(D), held = all;
        for (int c : subset) {
            test.add(attrs, c);
            held.add(attrs, c, -1.0);
        }
        return objective(held, test, D);
    };

    struct State {
        std::vector<int> subset;  // kept sorted
        double value;
    };
    std::vector<State> beam{{{}, -1.0}};
    for (std::size_t step = 0; step < k; ++step) {
        std::vector<State> cand;
        std::set<std::vector<int>> seen;
        for (const State& st : beam) {
            for (int c : pool) {
                if (std::binary_search(st.subset.begin(), st.subset.end(), c)) continue;
                std::vector<int> nxt = st.subset;
                nxt.insert(std::upper_bound(nxt.begin(), nxt.end(), c), c);
                if (!seen.insert(nxt).second) continue;
                cand.push_back({nxt, score(nxt)});
            }
        }
        std::stable_sort(cand.begin(), cand.end(),
                         [](const State& x, const State& y) { return x.value > y.value; });
        if (cand.size() > static_cast<std::size_t>(width)) cand.resize(static_cast<std::size_t>(width));
        beam = std::move(cand);
    }

    State best = beam.front();
    std::vector<const State*> ties;
    for (const State& st : beam)
        if (st.value == best.value) ties.push_back(&st);
    if (ties.size() > 1) best = *ties[rng.index(ties.size())];

    if (swap_refine) {
        bool improved = true;
        int rounds = 0;
        while (improved && rounds++ < 200) {
            improved = false;
            State trial = best;
            for (std::size_t i = 0; i < best.subset.size(); ++i) {
                for (int c : pool) {
                    if (std::binary_search(best.subset.begin(), best.subset.end(), c)) continue;
                    std::vector<int> nxt = best.subset;
                    nxt.erase(nxt.begin() + static_cast<std::ptrdiff_t>(i));
                    nxt.insert(std::upper_bound(nxt.begin(), nxt.end(), c), c);
                    double v = score(nxt);
                    if (v > trial.value) trial = {nxt, v};
                }
            }
            if (trial.value > best.value) {
                best = trial;
                improved = true;
            }
        }
    }
    return {best.subset, best.value};
}

SubsetSearchResult best_subset(const AttributeMatrix& attrs, const std::vector<int>& pool,
                               std::size_t k, std::uint64_t seed, int width, bool swap_refine,
                               std::size_t exhaustive_limit) {
    Rng rng(seed);
    if (k == 0) return {{}, 0.0};
    if (n_choose_k(pool.size(), k) <= exhaustive_limit)
        return exhaustive_best(attrs, pool, k, rng);
    return beam_best(attrs, pool, k, width, swap_refine, rng);
}

} // namespace

double split_shift_objective(const AttributeMatrix& attrs, const std::vector<int>& held,
                             const std::vector<int>& test) {
    std::size_t D = attrs.num_attributes;
    SetStats h(D), t(D);
    for (int c : held) h.add(attrs, c);
    for (int c : test) t.add(attrs, c);
    return objective(h, t, D);
}

SplitDef cs_split(const AttributeMatrix& attrs, SplitCounts counts, std::uint64_t seed,
                  int beam_width, bool swap_refine, std::size_t exhaustive_limit) {
    if (counts.n_train < 1 || counts.n_val < 0 || counts.n_test < 1)
        throw InputError("cs_split: need n_train >= 1, n_val >= 0, n_test >= 1");
    if (static_cast<std::size_t>(counts.n_train + counts.n_val + counts.n_test) != attrs.num_classes)
        throw InputError("cs_split: counts must sum to the class count " +
                         std::to_string(attrs.num_classes));
    if (beam_width < 1) throw InputError("cs_split: beam width must be >= 1");

    std::vector<int> pool(attrs.num_classes);
    for (std::size_t c = 0; c < attrs.num_classes; ++c) pool[c] = static_cast<int>(c);

    Rng rng(seed);
    auto test_res = best_subset(attrs, pool, static_cast<std::size_t>(counts.n_test),
                                rng.derive(1).next_u64(), beam_width, swap_refine, exhaustive_limit);

    std::vector<int> rest;
    for (int c : pool)
        if (!std::binary_search(test_res.subset.begin(), test_res.subset.end(), c)) rest.push_back(c);

    auto val_res = best_subset(attrs, rest, static_cast<std::size_t>(counts.n_val),
                               rng.derive(2).next_u64(), beam_width, swap_refine, exhaustive_limit);

    SplitDef split;
    split.test_classes = test_res.subset;
    split.val_classes = val_res.subset;
    for (int c : rest)
        if (!std::binary_search(val_res.subset.begin(), val_res.subset.end(), c))
            split.train_classes.push_back(c);
    std::sort(split.test_classes.begin(), split.test_classes.end());
    std::sort(split.val_classes.begin(), split.val_classes.end());
    std::sort(split.train_classes.begin(), split.train_classes.end());
    split.validate(attrs.num_classes);
    return split;
}

SplitAudit split_audit(const Dataset& ds) {
    SplitAudit audit;
    Matrix seen = corr_seen(ds.attributes, ds.labels, ds.split.seen_classes());
    Matrix unseen = corr_unseen(ds.attributes, ds.split.test_classes);
    audit.shift = summarize(delta_corr_matrix(seen, unseen));
    std::set<int> train(ds.split.train_classes.begin(), ds.split.train_classes.end());
    std::set<int> val(ds.split.val_classes.begin(), ds.split.val_classes.end());
    std::set<int> test(ds.split.test_classes.begin(), ds.split.test_classes.end());
    for (int y : ds.labels) {
        if (train.count(y)) ++audit.train_instances;
        else if (val.count(y)) ++audit.val_instances;
        else if (test.count(y)) ++audit.test_instances;
    }
    return audit;
}

} // namespace gal
