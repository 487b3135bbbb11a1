#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pinnmpc/mlp.hpp"
#include "pinnmpc/rng.hpp"

using namespace pinnmpc;

namespace {

/// max relative mismatch between analytic and central-difference gradients
/// over every weight, bias and input coordinate.
double gradcheck(MlpModel& model, const Eigen::VectorXd& input, double h = 1e-5) {
    // scalar objective: L = 0.5 ||y||^2 in normalized space
    auto loss_of = [&](const Eigen::VectorXd& v) {
        Eigen::MatrixXd y = model.forward_normalized(v);
        return 0.5 * y.squaredNorm();
    };

    MlpModel::Cache cache;
    Eigen::MatrixXd y = model.forward_normalized(input, &cache);
    MlpModel::Gradients grads;
    grads.init_like(model);
    Eigen::MatrixXd input_grad = model.backward_normalized(cache, y, &grads);

    double worst = 0.0;
    auto compare = [&](double analytic, double numeric) {
        const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(analytic - numeric) / scale);
    };

    Eigen::VectorXd theta = model.parameters();
    Eigen::VectorXd flat = MlpModel::flatten(grads);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        Eigen::VectorXd tp = theta, tm = theta;
        tp[i] += h;
        tm[i] -= h;
        model.set_parameters(tp);
        const double fp = loss_of(input);
        model.set_parameters(tm);
        const double fm = loss_of(input);
        model.set_parameters(theta);
        compare(flat[i], (fp - fm) / (2 * h));
    }
    for (Eigen::Index i = 0; i < input.size(); ++i) {
        Eigen::VectorXd vp = input, vm = input;
        vp[i] += h;
        vm[i] -= h;
        compare(input_grad(i, 0), (loss_of(vp) - loss_of(vm)) / (2 * h));
    }
    return worst;
}

}  // namespace

TEST_CASE("zero-initialized final layer outputs the normalization mean") {
    Rng rng(1);
    MlpModel m = MlpModel::make({7, 16, 5}, rng);
    m.weights.back().setZero();
    m.biases.back().setZero();
    m.out_mean = (Eigen::VectorXd(5) << 1, 2, 3, 4, 5).finished();
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd v(7);
        for (int i = 0; i < 7; ++i) v[i] = rng.uniform(-3, 3);
        Eigen::VectorXd y = m.denormalize_output(m.forward_normalized(m.normalize_input(v)));
        CHECK((y - m.out_mean).norm() == 0.0);
    }
}

TEST_CASE("forward is a pure function") {
    Rng rng(2);
    MlpModel m = MlpModel::make({29, 8, 12}, rng);
    Eigen::VectorXd v = Eigen::VectorXd::Random(29);
    Eigen::MatrixXd a = m.forward_normalized(v);
    Eigen::MatrixXd b = m.forward_normalized(v);
    CHECK(a == b);
}

TEST_CASE("reverse-mode gradients match central finite differences") {
    Rng rng(3);
    for (int config = 0; config < 10; ++config) {
        MlpModel m = MlpModel::make({5, 8, 8, 3}, rng);
        Eigen::VectorXd v(5);
        for (int i = 0; i < 5; ++i) v[i] = rng.uniform(-2, 2);
        CHECK(gradcheck(m, v) < 1e-5);
    }
}

TEST_CASE("jvp tangent output matches directional finite differences") {
    Rng rng(4);
    MlpModel m = MlpModel::make({6, 10, 4}, rng);
    Eigen::VectorXd v = Eigen::VectorXd::Random(6);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(6);
    dir[2] = 1.0;  // one input channel, as the physics loss uses it
    auto [y, dy] = m.jvp_normalized(v, dir);
    const double h = 1e-6;
    Eigen::MatrixXd yp = m.forward_normalized(v + h * dir);
    Eigen::MatrixXd ym = m.forward_normalized(v - h * dir);
    CHECK((dy - (yp - ym) / (2 * h)).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK((y - m.forward_normalized(v)).norm() == 0.0);
}

TEST_CASE("rectifier blocks gradient through negative preactivations") {
    MlpModel m;
    m.layer_sizes = {1, 1, 1};
    m.weights = {Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::MatrixXd::Constant(1, 1, 1.0)};
    m.biases = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
    m.in_mean = m.out_mean = Eigen::VectorXd::Zero(1);
    m.in_scale = m.out_scale = Eigen::VectorXd::Ones(1);

    Eigen::VectorXd v(1);
    v << -0.5;  // preactivation negative
    MlpModel::Cache cache;
    m.forward_normalized(v, &cache);
    Eigen::MatrixXd up = Eigen::MatrixXd::Ones(1, 1);
    MlpModel::Gradients grads;
    grads.init_like(m);
    Eigen::MatrixXd in_grad = m.backward_normalized(cache, up, &grads);
    CHECK(in_grad(0, 0) == 0.0);
    CHECK(grads.dW[0](0, 0) == 0.0);
}

TEST_CASE("constant upstream through an identity network passes unchanged") {
    MlpModel m;
    m.layer_sizes = {3, 3};
    m.weights = {Eigen::MatrixXd::Identity(3, 3)};
    m.biases = {Eigen::VectorXd::Zero(3)};
    m.in_mean = m.out_mean = Eigen::VectorXd::Zero(3);
    m.in_scale = m.out_scale = Eigen::VectorXd::Ones(3);

    Eigen::VectorXd v = Eigen::VectorXd::Random(3);
    MlpModel::Cache cache;
    m.forward_normalized(v, &cache);
    Eigen::MatrixXd up = Eigen::MatrixXd::Constant(3, 1, 0.7);
    Eigen::MatrixXd in_grad = m.backward_normalized(cache, up);
    CHECK((in_grad - up).norm() == 0.0);
}

TEST_CASE("normalization round trip is identity to 1e-12") {
    Rng rng(5);
    MlpModel m = MlpModel::make({4, 6, 2}, rng);
    m.in_mean = (Eigen::VectorXd(4) << 1, -2, 0.5, 3).finished();
    m.in_scale = (Eigen::VectorXd(4) << 0.1, 10, 2, 0.01).finished();
    Eigen::VectorXd v = Eigen::VectorXd::Random(4) * 5.0;
    Eigen::VectorXd round =
        m.in_mean + m.in_scale.cwiseProduct(m.normalize_input(v));
    CHECK((round - v).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("input jacobian matches finite differences through the normalization chain") {
    Rng rng(6);
    MlpModel m = MlpModel::make({29, 12, 12}, rng);
    m.in_mean.setConstant(0.3);
    m.in_scale.setConstant(2.0);
    m.out_mean.setConstant(-1.0);
    m.out_scale.setConstant(0.5);
    Eigen::VectorXd v = Eigen::VectorXd::Random(29);
    Eigen::MatrixXd J = m.input_jacobian(v);
    const double h = 1e-6;
    for (int i : {0, 7, 12, 24, 28}) {
        Eigen::VectorXd vp = v, vm = v;
        vp[i] += h;
        vm[i] -= h;
        Eigen::VectorXd num =
            (m.denormalize_output(m.forward_normalized(m.normalize_input(vp))) -
             m.denormalize_output(m.forward_normalized(m.normalize_input(vm)))) /
            (2 * h);
        CHECK((J.col(i) - num).lpNorm<Eigen::Infinity>() < 1e-6);
    }
}

TEST_CASE("checkpoint round trip is bit exact") {
    Rng rng(7);
    MlpModel m = MlpModel::make({29, 96, 96, 96, 12}, rng);
    m.in_mean.setRandom();
    m.in_scale = m.in_scale.array() + 0.5;
    m.out_mean.setRandom();
    m.t_min = 0.005;
    m.t_max = 0.05;

    const std::string dir = std::filesystem::temp_directory_path().string();
    const std::string p1 = dir + "/ckpt1.bin", p2 = dir + "/ckpt2.bin";
    m.save_checkpoint(p1);
    MlpModel back = MlpModel::load_checkpoint(p1);
    CHECK(back.parameters() == m.parameters());
    CHECK(back.in_mean == m.in_mean);
    CHECK(back.t_min == m.t_min);

    Eigen::VectorXd x = Eigen::VectorXd::Random(12), u = Eigen::VectorXd::Random(12);
    Eigen::Vector4d w = Eigen::Vector4d::Random();
    CHECK(back.predict(x, u, 0.01, w).x_next == m.predict(x, u, 0.01, w).x_next);

    back.save_checkpoint(p2);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
}

TEST_CASE("corrupted magic and version bumps are rejected with messages") {
    Rng rng(8);
    MlpModel m = MlpModel::make({3, 4, 2}, rng);
    const std::string dir = std::filesystem::temp_directory_path().string();
    const std::string path = dir + "/ckpt_bad.bin";
    m.save_checkpoint(path);

    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("XX", 2);
    }
    CHECK_THROWS_WITH_AS(MlpModel::load_checkpoint(path), doctest::Contains("magic"),
                         std::runtime_error);

    m.save_checkpoint(path);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(12);  // version field follows the magic
        std::uint32_t v = 9;
        f.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    try {
        MlpModel::load_checkpoint(path);
        FAIL("expected version error");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("9") != std::string::npos);
        CHECK(msg.find("1") != std::string::npos);
    }
}

TEST_CASE("truncated checkpoints are rejected") {
    Rng rng(9);
    MlpModel m = MlpModel::make({5, 8, 3}, rng);
    const std::string dir = std::filesystem::temp_directory_path().string();
    const std::string path = dir + "/ckpt_trunc.bin";
    m.save_checkpoint(path);
    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size / 2);
    CHECK_THROWS_WITH_AS(MlpModel::load_checkpoint(path), doctest::Contains("truncated"),
                         std::runtime_error);
}

TEST_CASE("extrapolation flag raises outside the trained T range") {
    Rng rng(10);
    MlpModel m = MlpModel::make({29, 8, 12}, rng);
    m.t_min = 0.005;
    m.t_max = 0.05;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(12), u = Eigen::VectorXd::Zero(12);
    Eigen::Vector4d w = Eigen::Vector4d::Zero();
    CHECK_FALSE(m.predict(x, u, 0.01, w).extrapolated);
    CHECK(m.predict(x, u, 0.2, w).extrapolated);
    CHECK(m.predict(x, u, 0.001, w).extrapolated);
}
