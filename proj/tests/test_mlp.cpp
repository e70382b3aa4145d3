#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "rwsim/mlp.hpp"

using namespace rwsim;

namespace {

// Central finite differences of a scalar function of the flat parameters.
template <typename F>
Eigen::VectorXd finite_diff(MlpD& net, F f, double h = 1e-6) {
  const Eigen::VectorXd theta = net.flatten_parameters();
  Eigen::VectorXd grad(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd t = theta;
    t[i] = theta[i] + h;
    net.set_parameters(t);
    const double up = f();
    t[i] = theta[i] - h;
    net.set_parameters(t);
    const double down = f();
    grad[i] = (up - down) / (2 * h);
  }
  net.set_parameters(theta);
  return grad;
}

}  // namespace

TEST_CASE("forward pass of a hand-set single layer") {
  std::mt19937_64 rng(1);
  MlpD net({2, 1}, rng);
  Eigen::VectorXd theta(3);
  theta << 2.0, -1.0, 0.5;  // w = [2, -1], b = 0.5
  net.set_parameters(theta);
  Eigen::VectorXd x(2);
  x << 3.0, 4.0;
  CHECK(net.forward(x)[0] == doctest::Approx(2 * 3 - 1 * 4 + 0.5));
}

TEST_CASE("analytic gradients match finite differences") {
  std::mt19937_64 rng(7);
  for (int probe = 0; probe < 5; ++probe) {
    MlpD net({4, 8, 8, 3}, rng);
    Eigen::VectorXd x = Eigen::VectorXd::Random(4);
    const int out_idx = probe % 3;

    MlpD::Tape tape;
    net.forward(x, tape);
    Eigen::VectorXd grad_out = Eigen::VectorXd::Zero(3);
    grad_out[out_idx] = 1.0;
    const Eigen::VectorXd analytic =
        MlpD::flatten_gradients(net.backward(tape, grad_out));

    const Eigen::VectorXd numeric =
        finite_diff(net, [&]() { return net.forward(x)[out_idx]; });
    const double rel = (analytic - numeric).norm() /
                       std::max(numeric.norm(), 1e-12);
    CHECK(rel < 1e-6);
  }
}

TEST_CASE("apply moves parameters along the gradient") {
  std::mt19937_64 rng(3);
  MlpD net({3, 5, 1}, rng);
  Eigen::VectorXd x = Eigen::VectorXd::Random(3);
  const double before = net.forward(x)[0];

  MlpD::Tape tape;
  net.forward(x, tape);
  Eigen::VectorXd one(1);
  one << 1.0;
  const auto g = net.backward(tape, one);
  net.apply(g, 0.01);  // ascend on the output
  CHECK(net.forward(x)[0] > before);
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  std::mt19937_64 rng(11);
  MlpD net({6, 16, 16, 4}, rng);
  std::stringstream buf;
  net.save(buf);
  const MlpD loaded = MlpD::load(buf);
  CHECK(loaded.sizes() == net.sizes());
  const Eigen::VectorXd a = net.flatten_parameters();
  const Eigen::VectorXd b = loaded.flatten_parameters();
  REQUIRE(a.size() == b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("truncated checkpoints are rejected") {
  std::mt19937_64 rng(13);
  MlpD net({4, 8, 2}, rng);
  std::stringstream buf;
  net.save(buf);
  std::string bytes = buf.str();
  bytes.resize(bytes.size() / 2);
  std::stringstream half(bytes);
  CHECK_THROWS(MlpD::load(half));
}
