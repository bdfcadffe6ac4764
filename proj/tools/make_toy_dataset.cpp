#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gal/data.hpp"
#include "gal/errors.hpp"
#include "gal/matrix.hpp"
#include "gal/rng.hpp"

// Generates a small synthetic zero-shot dataset directory: random binary
// class-attribute signatures, features produced by a linear map from the
// signature plus Gaussian noise, and a class split. The linear link makes
// attribute scores recoverable, so training demos reach useful accuracy.
int main(int argc, char** argv) {
    CLI::App app{"generate a demo zero-shot dataset directory"};
    std::string out_dir;
    int classes = 12, attrs = 8, dim = 16, per_class = 50;
    double noise = 0.4;
    std::uint64_t seed = 0;
    app.add_option("out_dir", out_dir, "output directory")->required();
    app.add_option("--classes", classes, "number of classes (default 12)");
    app.add_option("--attrs", attrs, "number of attributes (default 8)");
    app.add_option("--dim", dim, "feature dimension (default 16)");
    app.add_option("--per-class", per_class, "instances per class (default 50)");
    app.add_option("--noise", noise, "feature noise stddev (default 0.4)");
    app.add_option("--seed", seed, "RNG seed (default 0)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (classes < 4 || attrs < 2 || dim < 1 || per_class < 1)
            throw gal::UsageError("need classes >= 4, attrs >= 2, dim >= 1, per-class >= 1");
        auto C = static_cast<std::size_t>(classes);
        auto D = static_cast<std::size_t>(attrs);
        auto d = static_cast<std::size_t>(dim);
        auto n_per = static_cast<std::size_t>(per_class);

        gal::Rng rng(seed);
        gal::Matrix phi(C, D);
        for (std::size_t a = 0; a < D; ++a) {
            bool constant = true;
            while (constant) {
                for (std::size_t c = 0; c < C; ++c) phi(c, a) = rng.uniform() < 0.5 ? 0.0 : 1.0;
                for (std::size_t c = 1; c < C; ++c)
                    if (phi(c, a) != phi(0, a)) constant = false;
            }
        }

        gal::Matrix link(D, d);
        for (auto& v : link.raw()) v = rng.normal();

        gal::Dataset ds;
        ds.attributes = gal::make_attribute_matrix(phi);
        ds.features = gal::Matrix(C * n_per, d);
        ds.labels.resize(C * n_per);
        std::size_t row = 0;
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t k = 0; k < n_per; ++k, ++row) {
                ds.labels[row] = static_cast<int>(c);
                for (std::size_t j = 0; j < d; ++j) {
                    double mean = 0.0;
                    for (std::size_t a = 0; a < D; ++a) mean += phi(c, a) * link(a, j);
                    ds.features(row, j) = mean + rng.normal(0.0, noise);
                }
            }
        }

        std::vector<int> ids(C);
        std::iota(ids.begin(), ids.end(), 0);
        rng.shuffle(ids);
        std::size_t n_test = std::max<std::size_t>(1, C / 4);
        std::size_t n_val = std::max<std::size_t>(1, C / 4);
        std::size_t n_train = C - n_test - n_val;
        ds.split.train_classes.assign(ids.begin(), ids.begin() + n_train);
        ds.split.val_classes.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
        ds.split.test_classes.assign(ids.begin() + n_train + n_val, ids.end());

        std::filesystem::create_directories(out_dir);
        gal::save_dataset(ds, out_dir);
        std::cout << "wrote " << out_dir << " (" << C << " classes, " << D << " attributes, "
                  << C * n_per << " instances)\n";
        return 0;
    } catch (const gal::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
