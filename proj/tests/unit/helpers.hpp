#pragma once

#include "imrom/model.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testing {

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("imrom_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

// Random symmetric model with M = I-ish SPD, K SPD, symmetric G and H.
inline imrom::SecondOrderModel random_model(int n, unsigned seed, double nonlinear = 1.0,
                                            double fill = 0.6) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
    imrom::SecondOrderModel m;
    m.name = "random";
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return u(rng); });
    Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return u(rng); });
    const Eigen::MatrixXd mass = Eigen::MatrixXd::Identity(n, n) + 0.1 * a * a.transpose();
    const Eigen::MatrixXd stiff = 4.0 * Eigen::MatrixXd::Identity(n, n) + b * b.transpose();
    m.M = mass.sparseView();
    m.K = stiff.sparseView();
    m.C = imrom::SparseMatrix(n, n);
    m.G = imrom::QuadTensor(n);
    m.H = imrom::CubTensor(n);
    for (int p = 0; p < n; ++p)
        for (int r = 0; r < n; ++r)
            for (int s = r; s < n; ++s)
                if (pos(rng) < fill) m.G.add(p, r, s, nonlinear * u(rng));
    for (int p = 0; p < n; ++p)
        for (int r = 0; r < n; ++r)
            for (int s = r; s < n; ++s)
                for (int t = s; t < n; ++t)
                    if (pos(rng) < fill) m.H.add(p, r, s, t, nonlinear * u(rng));
    m.G.finalize();
    m.H.finalize();
    return m;
}

}  // namespace testing
