#include "zernet/conv.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "zernet/errors.hpp"
#include "zernet/util.hpp"
#include "zernet/zernike.hpp"

using namespace zernet;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

PatchTensor random_tensor(int n, int k, int d, Rng& rng) {
    PatchTensor t;
    t.n = n;
    t.k = k;
    t.d = d;
    t.r0 = 0.5;
    t.data = random_matrix(static_cast<Eigen::Index>(k) * d, n, rng);
    return t;
}

// rotates every input-channel block of every vertex column by phi
PatchTensor rotate_tensor(const PatchTensor& t, double phi) {
    const Eigen::MatrixXd rot = rotation_matrix(t.k, phi);
    PatchTensor out = t;
    for (int c = 0; c < t.d; ++c)
        out.data.middleRows(static_cast<Eigen::Index>(c) * t.k, t.k) =
            rot * t.data.middleRows(static_cast<Eigen::Index>(c) * t.k, t.k);
    return out;
}

double objective(const ConvResponse& r, const std::vector<Eigen::MatrixXd>& w) {
    double sum = 0.0;
    for (int t = 0; t < r.s; ++t)
        sum += (r.data[static_cast<std::size_t>(t)].array() *
                w[static_cast<std::size_t>(t)].array())
                   .sum();
    return sum;
}

}  // namespace

TEST_CASE("kernel banks hold s rotated copies with slice zero equal to base") {
    Rng rng(21);
    const int k = 21;
    const Eigen::MatrixXd base = random_matrix(2 * k, 3, rng);
    const KernelBank bank = make_kernel_bank(base, k, 4);
    CHECK(bank.d_in == 2);
    CHECK(bank.d_out == 3);
    CHECK(bank.s == 4);
    CHECK(bank.bias.size() == 3);
    CHECK(bank.bias.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(bank.bank.size() == 4);
    CHECK((bank.bank[0] - base).cwiseAbs().maxCoeff() == 0.0);  // exact at phi = 0

    // rotations act within (n, |m|) pairs, so per-pair norms never change
    for (int t = 1; t < 4; ++t) {
        for (int c = 0; c < 2; ++c) {
            for (int o = 0; o < 3; ++o) {
                for (int j = 1; j <= k; ++j) {
                    const ZernikeIndex zi = index_from_linear(j);
                    if (zi.m < 0) continue;
                    const auto row = [&](int jj) { return c * k + jj - 1; };
                    double before = base(row(j), o) * base(row(j), o);
                    double after = bank.bank[static_cast<std::size_t>(t)](row(j), o) *
                                   bank.bank[static_cast<std::size_t>(t)](row(j), o);
                    if (zi.m > 0) {
                        const int j_minus = linear_index(zi.n, -zi.m);
                        before += base(row(j_minus), o) * base(row(j_minus), o);
                        after += bank.bank[static_cast<std::size_t>(t)](row(j_minus), o) *
                                 bank.bank[static_cast<std::size_t>(t)](row(j_minus), o);
                    }
                    CHECK(after == doctest::Approx(before).epsilon(1e-12));
                }
            }
        }
    }

    const KernelBank single = make_kernel_bank(base, k, 1);
    CHECK((single.bank[0] - base).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rotationally symmetric kernels give identical slices") {
    const int k = 21;
    Eigen::MatrixXd base = Eigen::MatrixXd::Zero(k, 1);
    for (int j = 1; j <= k; ++j)
        if (index_from_linear(j).m == 0) base(j - 1, 0) = 0.7 * j;
    const KernelBank bank = make_kernel_bank(base, k, 4);
    for (int t = 1; t < 4; ++t)
        CHECK((bank.bank[static_cast<std::size_t>(t)] - base).cwiseAbs().maxCoeff() <
              1e-15);
}

TEST_CASE("kernel bank construction validates its inputs") {
    Rng rng(3);
    CHECK_THROWS_AS(make_kernel_bank(random_matrix(7, 1, rng), 6, 4), ShapeError);
    CHECK_THROWS_AS(make_kernel_bank(random_matrix(6, 1, rng), 6, 0), DomainError);
    CHECK_THROWS_AS(make_kernel_bank(random_matrix(6, 1, rng), 0, 4), DomainError);
    CHECK_THROWS_AS(
        make_kernel_bank(random_matrix(6, 1, rng), 6, 4, Eigen::VectorXd::Zero(2)),
        ShapeError);
    // k = 4 splits a rotation pair and cannot form a bank
    CHECK_THROWS_AS(make_kernel_bank(random_matrix(4, 1, rng), 4, 4), DomainError);
}

TEST_CASE("refreshing a bank rebuilds slices from the edited base") {
    Rng rng(9);
    KernelBank bank = make_kernel_bank(random_matrix(6, 2, rng), 6, 3);
    bank.base(2, 1) += 1.5;
    refresh_kernel_bank(bank);
    CHECK((bank.bank[0] - bank.base).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("convolution is the coefficient dot product plus bias") {
    const int k = 6;
    PatchTensor t;
    t.n = 2;
    t.k = k;
    t.d = 1;
    t.r0 = 1.0;
    t.data = Eigen::MatrixXd::Zero(k, 2);
    t.data(0, 0) = 1.0;  // vertex 0 carries basis 1 (piston)
    t.data(1, 1) = 1.0;  // vertex 1 carries basis 2

    Eigen::MatrixXd base = Eigen::MatrixXd::Zero(k, 2);
    base(0, 0) = 1.0;  // output 0 matches basis 1
    base(2, 1) = 1.0;  // output 1 matches basis 3
    const KernelBank bank = make_kernel_bank(base, k, 4);
    const ConvResponse r = zer_conv_forward(t, bank);
    REQUIRE(r.s == 4);
    CHECK(r.data[0](0, 0) == doctest::Approx(1.0));  // e_1 . e_1
    CHECK(r.data[0](1, 0) == doctest::Approx(0.0));  // e_1 . e_3
    CHECK(r.data[0](0, 1) == doctest::Approx(0.0));  // e_2 . e_1
    CHECK(r.data[0](1, 1) == doctest::Approx(0.0));  // e_2 . e_3
    // piston kernel is rotation-invariant: every t sees the same value
    for (int slice = 1; slice < 4; ++slice)
        CHECK(r.data[static_cast<std::size_t>(slice)](0, 0) == doctest::Approx(1.0));

    Eigen::VectorXd bias(2);
    bias << 0.25, -1.0;
    const ConvResponse rb = zer_conv_forward(t, make_kernel_bank(base, k, 4, bias));
    CHECK(rb.data[0](0, 0) == doctest::Approx(1.25));
    CHECK(rb.data[0](1, 1) == doctest::Approx(-1.0));
}

TEST_CASE("coefficient dot products agree with disk quadrature of f times g") {
    const int k = 21;
    Rng rng(55);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd alpha(k), beta(k);
        for (int j = 0; j < k; ++j) {
            alpha[j] = rng.uniform(-1.0, 1.0);
            beta[j] = rng.uniform(-1.0, 1.0);
        }
        const auto f = [&](double r, double theta) {
            double sum = 0.0;
            for (int j = 1; j <= k; ++j)
                sum += alpha[j - 1] * normalized_zernike<double>(j, r, theta);
            return sum;
        };
        const auto g = [&](double r, double theta) {
            double sum = 0.0;
            for (int j = 1; j <= k; ++j)
                sum += beta[j - 1] * normalized_zernike<double>(j, r, theta);
            return sum;
        };
        const double quad =
            oracles::disk_integral([&](double r, double th) { return f(r, th) * g(r, th); },
                                   64, 64);
        PatchTensor t;
        t.n = 1;
        t.k = k;
        t.d = 1;
        t.r0 = 1.0;
        t.data = alpha;
        const KernelBank bank = make_kernel_bank(beta, k, 1);
        const double dot = zer_conv_forward(t, bank).data[0](0, 0);
        CHECK(dot == doctest::Approx(quad).epsilon(1e-4));
    }
}

TEST_CASE("forward pass is linear in the tensor and in the kernels") {
    Rng rng(31);
    const int k = 10, n = 4;
    const PatchTensor a = random_tensor(n, k, 2, rng);
    PatchTensor b = random_tensor(n, k, 2, rng);
    const Eigen::MatrixXd base1 = random_matrix(2 * k, 3, rng);
    const Eigen::MatrixXd base2 = random_matrix(2 * k, 3, rng);
    const KernelBank bank1 = make_kernel_bank(base1, k, 4);
    const KernelBank bank2 = make_kernel_bank(base2, k, 4);
    const KernelBank mixed = make_kernel_bank(2.0 * base1 - 0.5 * base2, k, 4);

    PatchTensor combo = a;
    combo.data = 1.5 * a.data - 2.0 * b.data;
    const ConvResponse ra = zer_conv_forward(a, bank1);
    const ConvResponse rb = zer_conv_forward(b, bank1);
    const ConvResponse rc = zer_conv_forward(combo, bank1);
    const ConvResponse rm = zer_conv_forward(a, mixed);
    const ConvResponse r2 = zer_conv_forward(a, bank2);
    for (int t = 0; t < 4; ++t) {
        CHECK((rc.data[static_cast<std::size_t>(t)] -
               (1.5 * ra.data[static_cast<std::size_t>(t)] -
                2.0 * rb.data[static_cast<std::size_t>(t)]))
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
        CHECK((rm.data[static_cast<std::size_t>(t)] -
               (2.0 * ra.data[static_cast<std::size_t>(t)] -
                0.5 * r2.data[static_cast<std::size_t>(t)]))
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
    }
}

TEST_CASE("angular max pooling keeps the largest direction and records it") {
    ConvResponse r;
    r.n = 1;
    r.d_out = 1;
    r.s = 4;
    for (double v : {0.2, -1.0, 0.7, 0.3})
        r.data.push_back(Eigen::MatrixXd::Constant(1, 1, v));
    const PooledResponse p = angular_max_pool(r);
    CHECK(p.values(0, 0) == doctest::Approx(0.7));
    CHECK(p.argmax(0, 0) == 2);

    ConvResponse single;
    single.n = 2;
    single.d_out = 2;
    single.s = 1;
    single.data.push_back((Eigen::MatrixXd(2, 2) << 1, 2, 3, 4).finished());
    const PooledResponse ps = angular_max_pool(single);
    CHECK((ps.values - single.data[0]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ps.argmax.cwiseAbs().maxCoeff() == 0);

    ConvResponse ties;
    ties.n = 1;
    ties.d_out = 1;
    ties.s = 3;
    for (int t = 0; t < 3; ++t) ties.data.push_back(Eigen::MatrixXd::Constant(1, 1, 5.0));
    CHECK(angular_max_pool(ties).argmax(0, 0) == 0);  // first index wins ties
}

TEST_CASE("pool backward routes gradient only to argmax slots") {
    Rng rng(12);
    ConvResponse r;
    r.n = 5;
    r.d_out = 3;
    r.s = 4;
    for (int t = 0; t < 4; ++t) r.data.push_back(random_matrix(3, 5, rng));
    const PooledResponse p = angular_max_pool(r);
    const Eigen::MatrixXd up = random_matrix(3, 5, rng);
    const auto back = angular_max_pool_backward(p, up, 4);
    REQUIRE(back.size() == 4);
    for (Eigen::Index j = 0; j < 5; ++j)
        for (Eigen::Index i = 0; i < 3; ++i)
            for (int t = 0; t < 4; ++t) {
                const double expect = p.argmax(i, j) == t ? up(i, j) : 0.0;
                CHECK(back[static_cast<std::size_t>(t)](i, j) == expect);
            }
}

TEST_CASE("rotating the input permutes responses cyclically and pooling is invariant") {
    Rng rng(77);
    const int k = 21, s = 4;
    const PatchTensor t = random_tensor(7, k, 2, rng);
    const KernelBank bank = make_kernel_bank(random_matrix(2 * k, 3, rng), k, s);
    const ConvResponse r = zer_conv_forward(t, bank);
    const PooledResponse p = angular_max_pool(r);
    for (int t0 = 0; t0 < s; ++t0) {
        const PatchTensor rotated = rotate_tensor(t, kTwoPi * t0 / s);
        const ConvResponse rr = zer_conv_forward(rotated, bank);
        for (int slice = 0; slice < s; ++slice) {
            const int shifted = (slice - t0 + s) % s;
            CHECK((rr.data[static_cast<std::size_t>(slice)] -
                   r.data[static_cast<std::size_t>(shifted)])
                      .cwiseAbs()
                      .maxCoeff() < 1e-10);
        }
        const PooledResponse pr = angular_max_pool(rr);
        CHECK((pr.values - p.values).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("directional convolution preserves the direction axis") {
    Rng rng(41);
    const int k = 10, s = 4;
    const PatchTensor t = random_tensor(6, k, 2, rng);
    const KernelBank bank = make_kernel_bank(random_matrix(2 * k, 3, rng), k, s);

    // first-layer bridge: replicated input equals the plain convolution slices
    const DirectionalTensor rep = replicate_directions(t, s);
    const ConvResponse dir = directional_conv_forward(rep, bank);
    const ConvResponse plain = zer_conv_forward(t, bank);
    REQUIRE(dir.s == plain.s);
    for (int slice = 0; slice < s; ++slice)
        CHECK((dir.data[static_cast<std::size_t>(slice)] -
               plain.data[static_cast<std::size_t>(slice)])
                  .cwiseAbs()
                  .maxCoeff() == 0.0);

    // s = 1 degenerates to the plain convolution
    const KernelBank one = make_kernel_bank(bank.base, k, 1, bank.bias);
    const ConvResponse d1 = directional_conv_forward(replicate_directions(t, 1), one);
    const ConvResponse p1 = zer_conv_forward(t, one);
    CHECK((d1.data[0] - p1.data[0]).cwiseAbs().maxCoeff() == 0.0);

    // symmetric kernel + direction-constant input stays direction-constant
    Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(2 * k, 3);
    for (int c = 0; c < 2; ++c)
        for (int j = 1; j <= k; ++j)
            if (index_from_linear(j).m == 0)
                for (int o = 0; o < 3; ++o) sym(c * k + j - 1, o) = rng.normal();
    const ConvResponse symmetric =
        directional_conv_forward(rep, make_kernel_bank(sym, k, s));
    for (int slice = 1; slice < s; ++slice)
        CHECK((symmetric.data[static_cast<std::size_t>(slice)] - symmetric.data[0])
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
}

TEST_CASE("analytic gradients match central differences") {
    Rng rng(2024);
    const int n = 5, k = 6, d_in = 2, d_out = 3, s = 4;
    PatchTensor tensor = random_tensor(n, k, d_in, rng);
    KernelBank bank = make_kernel_bank(random_matrix(k * d_in, d_out, rng), k, s,
                                       random_matrix(d_out, 1, rng).col(0));
    std::vector<Eigen::MatrixXd> w;
    for (int t = 0; t < s; ++t) w.push_back(random_matrix(d_out, n, rng));

    const ZerConvGradients grads =
        zer_conv_backward(tensor, bank, w);  // upstream of sum(w .* resp) is w
    const double step = 1e-5;

    auto forward_obj = [&]() { return objective(zer_conv_forward(tensor, bank), w); };
    for (int probe = 0; probe < 12; ++probe) {
        const Eigen::Index i = static_cast<Eigen::Index>(rng.below(k * d_in));
        const Eigen::Index j = static_cast<Eigen::Index>(rng.below(n));
        const double keep = tensor.data(i, j);
        tensor.data(i, j) = keep + step;
        const double hi = forward_obj();
        tensor.data(i, j) = keep - step;
        const double lo = forward_obj();
        tensor.data(i, j) = keep;
        const double fd = (hi - lo) / (2.0 * step);
        CHECK(grads.d_tensor(i, j) ==
              doctest::Approx(fd).epsilon(1e-4).scale(std::fabs(fd) + 1.0));
    }
    for (int probe = 0; probe < 12; ++probe) {
        const Eigen::Index i = static_cast<Eigen::Index>(rng.below(k * d_in));
        const Eigen::Index o = static_cast<Eigen::Index>(rng.below(d_out));
        const double keep = bank.base(i, o);
        bank.base(i, o) = keep + step;
        refresh_kernel_bank(bank);
        const double hi = forward_obj();
        bank.base(i, o) = keep - step;
        refresh_kernel_bank(bank);
        const double lo = forward_obj();
        bank.base(i, o) = keep;
        refresh_kernel_bank(bank);
        const double fd = (hi - lo) / (2.0 * step);
        CHECK(grads.d_base(i, o) ==
              doctest::Approx(fd).epsilon(1e-4).scale(std::fabs(fd) + 1.0));
    }
    for (int o = 0; o < d_out; ++o) {
        const double keep = bank.bias[o];
        bank.bias[o] = keep + step;
        const double hi = forward_obj();
        bank.bias[o] = keep - step;
        const double lo = forward_obj();
        bank.bias[o] = keep;
        const double fd = (hi - lo) / (2.0 * step);
        CHECK(grads.d_bias[o] ==
              doctest::Approx(fd).epsilon(1e-4).scale(std::fabs(fd) + 1.0));
    }
}

TEST_CASE("pooled and directional gradients match central differences") {
    Rng rng(31337);
    const int n = 5, k = 6, d_in = 2, d_out = 3, s = 4;
    PatchTensor tensor = random_tensor(n, k, d_in, rng);
    KernelBank bank = make_kernel_bank(random_matrix(k * d_in, d_out, rng), k, s,
                                       random_matrix(d_out, 1, rng).col(0));
    const Eigen::MatrixXd w = random_matrix(d_out, n, rng);
    const double step = 1e-5;

    // pooled path: L = sum(w .* max_t response)
    auto pooled_obj = [&]() {
        return (angular_max_pool(zer_conv_forward(tensor, bank)).values.array() *
                w.array())
            .sum();
    };
    const PooledResponse pooled = angular_max_pool(zer_conv_forward(tensor, bank));
    const auto up = angular_max_pool_backward(pooled, w, s);
    const ZerConvGradients grads = zer_conv_backward(tensor, bank, up);
    for (int probe = 0; probe < 10; ++probe) {
        const Eigen::Index i = static_cast<Eigen::Index>(rng.below(k * d_in));
        const Eigen::Index j = static_cast<Eigen::Index>(rng.below(n));
        const double keep = tensor.data(i, j);
        tensor.data(i, j) = keep + step;
        const double hi = pooled_obj();
        tensor.data(i, j) = keep - step;
        const double lo = pooled_obj();
        tensor.data(i, j) = keep;
        const double fd = (hi - lo) / (2.0 * step);
        CHECK(grads.d_tensor(i, j) ==
              doctest::Approx(fd).epsilon(1e-4).scale(std::fabs(fd) + 1.0));
    }
    for (int probe = 0; probe < 10; ++probe) {
        const Eigen::Index i = static_cast<Eigen::Index>(rng.below(k * d_in));
        const Eigen::Index o = static_cast<Eigen::Index>(rng.below(d_out));
        const double keep = bank.base(i, o);
        bank.base(i, o) = keep + step;
        refresh_kernel_bank(bank);
        const double hi = pooled_obj();
        bank.base(i, o) = keep - step;
        refresh_kernel_bank(bank);
        const double lo = pooled_obj();
        bank.base(i, o) = keep;
        refresh_kernel_bank(bank);
        const double fd = (hi - lo) / (2.0 * step);
        CHECK(grads.d_base(i, o) ==
              doctest::Approx(fd).epsilon(1e-4).scale(std::fabs(fd) + 1.0));
    }

    // directional path with distinct per-direction inputs
    DirectionalTensor dir = replicate_directions(tensor, s);
    for (int t = 0; t < s; ++t)
        dir.slices[static_cast<std::size_t>(t)] += 0.3 * random_matrix(k * d_in, n, rng);
    std::vector<Eigen::MatrixXd> wd;
    for (int t = 0; t < s; ++t) wd.push_back(random_matrix(d_out, n, rng));
    auto dir_obj = [&]() { return objective(directional_conv_forward(dir, bank), wd); };
    const DirectionalConvGradients dgrads = directional_conv_backward(dir, bank, wd);
    for (int probe = 0; probe < 10; ++probe) {
        const int t = static_cast<int>(rng.below(s));
        const Eigen::Index i = static_cast<Eigen::Index>(rng.below(k * d_in));
        const Eigen::Index j = static_cast<Eigen::Index>(rng.below(n));
        double& cell = dir.slices[static_cast<std::size_t>(t)](i, j);
        const double keep = cell;
        cell = keep + step;
        const double hi = dir_obj();
        cell = keep - step;
        const double lo = dir_obj();
        cell = keep;
        const double fd = (hi - lo) / (2.0 * step);
        CHECK(dgrads.d_slices[static_cast<std::size_t>(t)](i, j) ==
              doctest::Approx(fd).epsilon(1e-4).scale(std::fabs(fd) + 1.0));
    }
    for (int probe = 0; probe < 10; ++probe) {
        const Eigen::Index i = static_cast<Eigen::Index>(rng.below(k * d_in));
        const Eigen::Index o = static_cast<Eigen::Index>(rng.below(d_out));
        const double keep = bank.base(i, o);
        bank.base(i, o) = keep + step;
        refresh_kernel_bank(bank);
        const double hi = dir_obj();
        bank.base(i, o) = keep - step;
        refresh_kernel_bank(bank);
        const double lo = dir_obj();
        bank.base(i, o) = keep;
        refresh_kernel_bank(bank);
        const double fd = (hi - lo) / (2.0 * step);
        CHECK(dgrads.d_base(i, o) ==
              doctest::Approx(fd).epsilon(1e-4).scale(std::fabs(fd) + 1.0));
    }
    for (int o = 0; o < d_out; ++o) {
        const double keep = bank.bias[o];
        bank.bias[o] = keep + step;
        const double hi = dir_obj();
        bank.bias[o] = keep - step;
        const double lo = dir_obj();
        bank.bias[o] = keep;
        const double fd = (hi - lo) / (2.0 * step);
        CHECK(dgrads.d_bias[o] ==
              doctest::Approx(fd).epsilon(1e-4).scale(std::fabs(fd) + 1.0));
    }
}

TEST_CASE("zero upstream gradients produce zero parameter gradients") {
    Rng rng(8);
    const int n = 3, k = 6, s = 4;
    const PatchTensor tensor = random_tensor(n, k, 1, rng);
    const KernelBank bank = make_kernel_bank(random_matrix(k, 2, rng), k, s);
    const std::vector<Eigen::MatrixXd> zeros(4, Eigen::MatrixXd::Zero(2, n));
    const ZerConvGradients g = zer_conv_backward(tensor, bank, zeros);
    CHECK(g.d_tensor.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.d_base.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.d_bias.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("convolution rejects mismatched shapes") {
    Rng rng(64);
    const PatchTensor tensor = random_tensor(3, 10, 2, rng);
    const KernelBank bank = make_kernel_bank(random_matrix(6, 2, rng), 6, 4);
    CHECK_THROWS_AS(zer_conv_forward(tensor, bank), ShapeError);  // k mismatch

    const KernelBank wide = make_kernel_bank(random_matrix(30, 2, rng), 10, 4);
    CHECK_THROWS_AS(zer_conv_forward(tensor, wide), ShapeError);  // d_in mismatch

    const KernelBank good = make_kernel_bank(random_matrix(20, 2, rng), 10, 4);
    std::vector<Eigen::MatrixXd> bad_up(3, Eigen::MatrixXd::Zero(2, 3));
    CHECK_THROWS_AS(zer_conv_backward(tensor, good, bad_up), ShapeError);

    DirectionalTensor dir = replicate_directions(tensor, 3);
    CHECK_THROWS_AS(directional_conv_forward(dir, good), ShapeError);  // s mismatch
}
