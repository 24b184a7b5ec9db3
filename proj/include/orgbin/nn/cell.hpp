#pragma once

// Elman RNN, GRU and LSTM cells with explicit forward caches and backward
// steps for backpropagation through time.
//
// Gate blocks are stacked row-wise in W (G*h x d), U (G*h x h) and b (G*h):
//   rnn : [a]              h' = tanh(a)
//   gru : [z; r; n]        z = sig(.), r = sig(.), n = tanh(Wn x + Un (r*h) + bn)
//                          h' = (1 - z) * n + z * h
//   lstm: [i; f; o; g]     c' = f * c + i * g,  h' = o * tanh(c')

#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "orgbin/common.hpp"

namespace orgbin::nn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class CellKind { rnn, gru, lstm };

inline std::string_view to_string(CellKind k) {
  switch (k) {
    case CellKind::rnn: return "rnn";
    case CellKind::gru: return "gru";
    case CellKind::lstm: return "lstm";
  }
  return "?";
}

inline CellKind cell_kind_from_string(std::string_view s) {
  if (s == "rnn") return CellKind::rnn;
  if (s == "gru") return CellKind::gru;
  if (s == "lstm") return CellKind::lstm;
  throw ConfigError("unknown cell kind '" + std::string(s) + "'");
}

inline constexpr Index gate_count(CellKind k) {
  switch (k) {
    case CellKind::rnn: return 1;
    case CellKind::gru: return 3;
    case CellKind::lstm: return 4;
  }
  return 0;
}

struct CellParams {
  CellKind kind = CellKind::lstm;
  MatrixXd W;  // (G*h) x d
  MatrixXd U;  // (G*h) x h
  VectorXd b;  // G*h

  CellParams() = default;
  CellParams(CellKind k, Index input_dim, Index hidden_dim)
      : kind(k),
        W(MatrixXd::Zero(gate_count(k) * hidden_dim, input_dim)),
        U(MatrixXd::Zero(gate_count(k) * hidden_dim, hidden_dim)),
        b(VectorXd::Zero(gate_count(k) * hidden_dim)) {}

  Index input_dim() const { return W.cols(); }
  Index hidden_dim() const { return U.cols(); }

  void check_shapes() const {
    const Index h = hidden_dim();
    const Index g = gate_count(kind) * h;
    if (W.rows() != g || U.rows() != g || U.cols() != h || b.size() != g)
      throw DimensionError("cell parameters are inconsistent with (d, h)");
  }

  bool all_finite() const { return W.allFinite() && U.allFinite() && b.allFinite(); }
};

// Hidden state, plus the memory cell for LSTM (empty otherwise).
struct CellState {
  VectorXd h;
  VectorXd c;

  static CellState zero(const CellParams& p) {
    CellState s;
    s.h = VectorXd::Zero(p.hidden_dim());
    if (p.kind == CellKind::lstm) s.c = VectorXd::Zero(p.hidden_dim());
    return s;
  }
};

// What one forward step keeps for its backward step.
struct StepCache {
  VectorXd x;
  VectorXd h_prev;
  VectorXd c_prev;
  VectorXd gates;  // activated gate values, stacked like b
  VectorXd c;      // lstm: new memory cell
  VectorXd tanh_c; // lstm: tanh(c)
};

namespace detail {

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

inline void check_step_dims(const CellParams& p, const VectorXd& x, const CellState& s) {
  p.check_shapes();
  if (x.size() != p.input_dim())
    throw DimensionError("cell input has size " + std::to_string(x.size()) + ", expected " +
                         std::to_string(p.input_dim()));
  if (s.h.size() != p.hidden_dim()) throw DimensionError("hidden state has wrong size");
  if (p.kind == CellKind::lstm && s.c.size() != p.hidden_dim())
    throw DimensionError("lstm cell state has wrong size");
}

}  // namespace detail

// Forward step that records what backward_step needs.
inline CellState forward_step(const CellParams& p, const VectorXd& x, const CellState& s,
                              StepCache& cache) {
  const Index h = p.hidden_dim();
  cache.x = x;
  cache.h_prev = s.h;
  CellState next;
  switch (p.kind) {
    case CellKind::rnn: {
      VectorXd a = p.W * x + p.U * s.h + p.b;
      cache.gates = a.array().tanh();
      next.h = cache.gates;
      break;
    }
    case CellKind::gru: {
      VectorXd ax = p.W * x + p.b;
      VectorXd zr = ax.head(2 * h) + p.U.topRows(2 * h) * s.h;
      cache.gates.resize(3 * h);
      cache.gates.head(2 * h) = zr.unaryExpr(&detail::sigmoid);
      auto z = cache.gates.segment(0, h);
      auto r = cache.gates.segment(h, h);
      VectorXd rh = r.cwiseProduct(s.h);
      cache.gates.segment(2 * h, h) =
          (ax.segment(2 * h, h) + p.U.bottomRows(h) * rh).array().tanh();
      auto n = cache.gates.segment(2 * h, h);
      next.h = (VectorXd::Ones(h) - z).cwiseProduct(n) + z.cwiseProduct(s.h);
      break;
    }
    case CellKind::lstm: {
      VectorXd a = p.W * x + p.U * s.h + p.b;
      cache.gates.resize(4 * h);
      cache.gates.head(3 * h) = a.head(3 * h).unaryExpr(&detail::sigmoid);
      cache.gates.tail(h) = a.tail(h).array().tanh();
      cache.c_prev = s.c;
      auto i = cache.gates.segment(0, h);
      auto f = cache.gates.segment(h, h);
      auto o = cache.gates.segment(2 * h, h);
      auto g = cache.gates.segment(3 * h, h);
      cache.c = f.cwiseProduct(s.c) + i.cwiseProduct(g);
      cache.tanh_c = cache.c.array().tanh();
      next.c = cache.c;
      next.h = o.cwiseProduct(cache.tanh_c);
      break;
    }
  }
  return next;
}

// One step of the cell equations, with dimension checks.
inline CellState cell_step(const CellParams& p, const VectorXd& x, const CellState& s) {
  detail::check_step_dims(p, x, s);
  StepCache cache;
  return forward_step(p, x, s, cache);
}

// Gradients flowing into the step's inputs.
struct StepGrads {
  VectorXd dx;
  VectorXd dh_prev;
  VectorXd dc_prev;
};

// Backward through one step. `dh` / `dc` are loss gradients w.r.t. the step's
// outputs (dc ignored unless lstm); parameter gradients accumulate into `g`.
inline StepGrads backward_step(const CellParams& p, const StepCache& cache, const VectorXd& dh,
                               const VectorXd& dc, CellParams& g) {
  const Index h = p.hidden_dim();
  StepGrads out;
  VectorXd da;  // gradient w.r.t. pre-activations, stacked like b
  switch (p.kind) {
    case CellKind::rnn: {
      da = dh.cwiseProduct((1.0 - cache.gates.array().square()).matrix());
      g.W.noalias() += da * cache.x.transpose();
      g.U.noalias() += da * cache.h_prev.transpose();
      g.b += da;
      out.dh_prev = p.U.transpose() * da;
      break;
    }
    case CellKind::gru: {
      auto z = cache.gates.segment(0, h);
      auto r = cache.gates.segment(h, h);
      auto n = cache.gates.segment(2 * h, h);
      da.resize(3 * h);
      VectorXd dn = dh.cwiseProduct(VectorXd::Ones(h) - z);
      VectorXd dz = dh.cwiseProduct(cache.h_prev - n);
      da.segment(2 * h, h) = dn.cwiseProduct((1.0 - n.array().square()).matrix());
      VectorXd rh = r.cwiseProduct(cache.h_prev);
      VectorXd drh = p.U.bottomRows(h).transpose() * da.segment(2 * h, h);
      VectorXd dr = drh.cwiseProduct(cache.h_prev);
      da.segment(0, h) = dz.cwiseProduct(z.cwiseProduct(VectorXd::Ones(h) - z));
      da.segment(h, h) = dr.cwiseProduct(r.cwiseProduct(VectorXd::Ones(h) - r));
      g.W.noalias() += da * cache.x.transpose();
      g.U.topRows(2 * h).noalias() += da.head(2 * h) * cache.h_prev.transpose();
      g.U.bottomRows(h).noalias() += da.segment(2 * h, h) * rh.transpose();
      g.b += da;
      out.dh_prev = dh.cwiseProduct(z) + drh.cwiseProduct(r) +
                    p.U.topRows(2 * h).transpose() * da.head(2 * h);
      break;
    }
    case CellKind::lstm: {
      auto i = cache.gates.segment(0, h);
      auto f = cache.gates.segment(h, h);
      auto o = cache.gates.segment(2 * h, h);
      auto gg = cache.gates.segment(3 * h, h);
      VectorXd dc_total =
          dc + dh.cwiseProduct(o).cwiseProduct((1.0 - cache.tanh_c.array().square()).matrix());
      da.resize(4 * h);
      da.segment(0, h) = dc_total.cwiseProduct(gg).cwiseProduct(i.cwiseProduct(VectorXd::Ones(h) - i));
      da.segment(h, h) =
          dc_total.cwiseProduct(cache.c_prev).cwiseProduct(f.cwiseProduct(VectorXd::Ones(h) - f));
      da.segment(2 * h, h) =
          dh.cwiseProduct(cache.tanh_c).cwiseProduct(o.cwiseProduct(VectorXd::Ones(h) - o));
      da.segment(3 * h, h) = dc_total.cwiseProduct(i).cwiseProduct((1.0 - gg.array().square()).matrix());
      g.W.noalias() += da * cache.x.transpose();
      g.U.noalias() += da * cache.h_prev.transpose();
      g.b += da;
      out.dh_prev = p.U.transpose() * da;
      out.dc_prev = dc_total.cwiseProduct(f);
      break;
    }
  }
  out.dx = p.W.transpose() * da;
  return out;
}

}  // namespace orgbin::nn
