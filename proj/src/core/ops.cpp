#include "flowsynth/core/ops.hpp"

#include <cmath>
#include <stdexcept>

namespace flowsynth::ag {

namespace {

void check(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

struct ParentVjp {
    Var parent;
    Vjp vjp;
};

// vjps capture inputs (never the node's own output) so the graph stays
// cycle-free under shared_ptr ownership; nonlinearities recompute their
// forward value when differentiated
Var make(Mat value, std::vector<ParentVjp> parents) {
    const bool recording = GradMode::enabled();
    bool any = false;
    if (recording) {
        for (const auto& p : parents) any = any || p.parent->requires_grad;
    }
    auto node = std::make_shared<Node>(std::move(value), recording && any);
    if (node->requires_grad) {
        for (auto& p : parents) {
            if (p.parent->requires_grad) node->edges.push_back({p.parent, std::move(p.vjp)});
        }
    }
    return node;
}

Var gather_idx(const Var& src, const std::shared_ptr<Mat>& idx);

// scatter/gather by a per-entry source-column index; both are linear in the
// data argument, so higher-order gradients stay exact
Var scatter_idx(const Var& g, const std::shared_ptr<Mat>& idx, Eigen::Index out_cols) {
    Mat out = Mat::Zero(g->rows(), out_cols);
    for (Eigen::Index i = 0; i < g->rows(); ++i)
        for (Eigen::Index j = 0; j < g->cols(); ++j)
            out(i, static_cast<Eigen::Index>((*idx)(i, j))) += g->val(i, j);
    return make(std::move(out), {{g, [idx](const Var& gg) { return gather_idx(gg, idx); }}});
}

Var gather_idx(const Var& src, const std::shared_ptr<Mat>& idx) {
    Mat out(idx->rows(), idx->cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            out(i, j) = src->val(i, static_cast<Eigen::Index>((*idx)(i, j)));
    Eigen::Index src_cols = src->cols();
    return make(std::move(out),
                {{src, [idx, src_cols](const Var& gg) { return scatter_idx(gg, idx, src_cols); }}});
}

Var embed_cols(const Var& g, Eigen::Index total_cols, Eigen::Index j0) {
    Mat out = Mat::Zero(g->rows(), total_cols);
    out.middleCols(j0, g->cols()) = g->val;
    Eigen::Index w = g->cols();
    return make(std::move(out), {{g, [j0, w](const Var& gg) { return slice_cols(gg, j0, w); }}});
}

Var col2im1d(const Var& g, Eigen::Index len, Eigen::Index ch, Eigen::Index ksize, Eigen::Index batch);

// derivative ladder for xlogx, masked at x <= 0; exact through second order
Var xlogx_dd(const Var& a) {
    Mat out = a->val.unaryExpr([](double x) { return x > 0.0 ? 1.0 / x : 0.0; });
    Mat dd = a->val.unaryExpr([](double x) { return x > 0.0 ? -1.0 / (x * x) : 0.0; });
    auto ddc = constant(std::move(dd));
    return make(std::move(out), {{a, [ddc](const Var& g) { return mul(g, ddc); }}});
}

Var xlogx_d(const Var& a) {
    Mat out = a->val.unaryExpr([](double x) { return x > 0.0 ? std::log(x) + 1.0 : 0.0; });
    return make(std::move(out), {{a, [a](const Var& g) { return mul(g, xlogx_dd(a)); }}});
}

}  // namespace

Var add(const Var& a, const Var& b) {
    check(a->rows() == b->rows() && a->cols() == b->cols(), "add: shape mismatch");
    return make(a->val + b->val, {{a, [](const Var& g) { return g; }},
                                  {b, [](const Var& g) { return g; }}});
}

Var sub(const Var& a, const Var& b) {
    check(a->rows() == b->rows() && a->cols() == b->cols(), "sub: shape mismatch");
    return make(a->val - b->val, {{a, [](const Var& g) { return g; }},
                                  {b, [](const Var& g) { return neg(g); }}});
}

Var neg(const Var& a) {
    return make(-a->val, {{a, [](const Var& g) { return neg(g); }}});
}

Var mul(const Var& a, const Var& b) {
    check(a->rows() == b->rows() && a->cols() == b->cols(), "mul: shape mismatch");
    return make(a->val.cwiseProduct(b->val), {{a, [b](const Var& g) { return mul(g, b); }},
                                              {b, [a](const Var& g) { return mul(g, a); }}});
}

Var div(const Var& a, const Var& b) {
    check(a->rows() == b->rows() && a->cols() == b->cols(), "div: shape mismatch");
    return make(a->val.cwiseQuotient(b->val),
                {{a, [b](const Var& g) { return div(g, b); }},
                 {b, [a, b](const Var& g) { return neg(div(div(mul(g, a), b), b)); }}});
}

Var smul(const Var& a, double s) {
    return make(a->val * s, {{a, [s](const Var& g) { return smul(g, s); }}});
}

Var sadd(const Var& a, double s) {
    return make(a->val.array() + s, {{a, [](const Var& g) { return g; }}});
}

Var square(const Var& a) {
    return make(a->val.cwiseProduct(a->val),
                {{a, [a](const Var& g) { return mul(g, smul(a, 2.0)); }}});
}

Var sqrt_(const Var& a) {
    return make(a->val.cwiseSqrt(),
                {{a, [a](const Var& g) { return div(smul(g, 0.5), sqrt_(a)); }}});
}

Var exp_(const Var& a) {
    Mat v = a->val.array().exp();
    return make(std::move(v), {{a, [a](const Var& g) { return mul(g, exp_(a)); }}});
}

Var log_(const Var& a) {
    Mat v = a->val.array().log();
    return make(std::move(v), {{a, [a](const Var& g) { return div(g, a); }}});
}

Var tanh_(const Var& a) {
    Mat v = a->val.array().tanh();
    return make(std::move(v), {{a, [a](const Var& g) {
                                    return mul(g, sadd(neg(square(tanh_(a))), 1.0));
                                }}});
}

Var sigmoid(const Var& a) {
    Mat v = a->val.unaryExpr([](double x) {
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    });
    return make(std::move(v), {{a, [a](const Var& g) {
                                    Var s = sigmoid(a);
                                    return mul(g, mul(s, sadd(neg(s), 1.0)));
                                }}});
}

Var relu(const Var& a) {
    Mat v = a->val.cwiseMax(0.0);
    Mat mask = (a->val.array() > 0.0).cast<double>();
    auto mc = constant(std::move(mask));
    return make(std::move(v), {{a, [mc](const Var& g) { return mul(g, mc); }}});
}

Var leaky_relu(const Var& a, double slope) {
    Mat v = a->val.unaryExpr([slope](double x) { return x > 0.0 ? x : slope * x; });
    Mat mask = a->val.unaryExpr([slope](double x) { return x > 0.0 ? 1.0 : slope; });
    auto mc = constant(std::move(mask));
    return make(std::move(v), {{a, [mc](const Var& g) { return mul(g, mc); }}});
}

Var clamp(const Var& a, double lo, double hi) {
    check(lo <= hi, "clamp: lo > hi");
    Mat v = a->val.cwiseMax(lo).cwiseMin(hi);
    Mat mask = a->val.unaryExpr([lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
    auto mc = constant(std::move(mask));
    return make(std::move(v), {{a, [mc](const Var& g) { return mul(g, mc); }}});
}

Var xlogx(const Var& a) {
    Mat v = a->val.unaryExpr([](double x) { return x > 0.0 ? x * std::log(x) : 0.0; });
    return make(std::move(v), {{a, [a](const Var& g) { return mul(g, xlogx_d(a)); }}});
}

Var add_rowvec(const Var& a, const Var& row) {
    check(row->rows() == 1 && row->cols() == a->cols(), "add_rowvec: shape mismatch");
    Mat v = a->val.rowwise() + row->val.row(0);
    return make(std::move(v), {{a, [](const Var& g) { return g; }},
                               {row, [](const Var& g) { return col_sum(g); }}});
}

Var rep_rows(const Var& row, Eigen::Index n) {
    check(row->rows() == 1, "rep_rows: input not a row vector");
    Mat v = row->val.replicate(n, 1);
    return make(std::move(v), {{row, [](const Var& g) { return col_sum(g); }}});
}

Var rep_cols(const Var& col, Eigen::Index m) {
    check(col->cols() == 1, "rep_cols: input not a column vector");
    Mat v = col->val.replicate(1, m);
    return make(std::move(v), {{col, [](const Var& g) { return row_sum(g); }}});
}

Var bcast(const Var& s, Eigen::Index n, Eigen::Index m) {
    check(s->rows() == 1 && s->cols() == 1, "bcast: input not 1x1");
    Mat v = Mat::Constant(n, m, s->val(0, 0));
    return make(std::move(v), {{s, [](const Var& g) { return sum(g); }}});
}

Var row_sum(const Var& a) {
    Mat v = a->val.rowwise().sum();
    Eigen::Index m = a->cols();
    return make(std::move(v), {{a, [m](const Var& g) { return rep_cols(g, m); }}});
}

Var col_sum(const Var& a) {
    Mat v = a->val.colwise().sum();
    Eigen::Index n = a->rows();
    return make(std::move(v), {{a, [n](const Var& g) { return rep_rows(g, n); }}});
}

Var sum(const Var& a) {
    Mat v(1, 1);
    v(0, 0) = a->val.sum();
    Eigen::Index n = a->rows(), m = a->cols();
    return make(std::move(v), {{a, [n, m](const Var& g) { return bcast(g, n, m); }}});
}

Var mean(const Var& a) {
    return smul(sum(a), 1.0 / static_cast<double>(a->rows() * a->cols()));
}

Var matmul(const Var& a, const Var& b) {
    check(a->cols() == b->rows(), "matmul: inner dims differ");
    Mat v = a->val * b->val;
    return make(std::move(v),
                {{a, [b](const Var& g) { return matmul(g, transpose(b)); }},
                 {b, [a](const Var& g) { return matmul(transpose(a), g); }}});
}

Var transpose(const Var& a) {
    Mat v = a->val.transpose();
    return make(std::move(v), {{a, [](const Var& g) { return transpose(g); }}});
}

Var bmm(const Var& a, const Var& b, Eigen::Index n_blocks, bool ta, bool tb) {
    check(n_blocks > 0 && a->rows() % n_blocks == 0 && b->rows() % n_blocks == 0,
          "bmm: rows not divisible into blocks");
    const Eigen::Index ra = a->rows() / n_blocks, ca = a->cols();
    const Eigen::Index rb = b->rows() / n_blocks, cb = b->cols();
    check((ta ? ra : ca) == (tb ? cb : rb), "bmm: inner dims differ");
    const Eigen::Index rc = ta ? ca : ra;
    const Eigen::Index cc = tb ? rb : cb;
    Mat v(n_blocks * rc, cc);
    for (Eigen::Index i = 0; i < n_blocks; ++i) {
        auto A = a->val.middleRows(i * ra, ra);
        auto B = b->val.middleRows(i * rb, rb);
        auto C = v.middleRows(i * rc, rc);
        if (!ta && !tb) C = A * B;
        else if (!ta && tb) C = A * B.transpose();
        else if (ta && !tb) C = A.transpose() * B;
        else C = A.transpose() * B.transpose();
    }
    Vjp da, db;
    if (!ta && !tb) {
        da = [b, n_blocks](const Var& g) { return bmm(g, b, n_blocks, false, true); };
        db = [a, n_blocks](const Var& g) { return bmm(a, g, n_blocks, true, false); };
    } else if (!ta && tb) {
        da = [b, n_blocks](const Var& g) { return bmm(g, b, n_blocks, false, false); };
        db = [a, n_blocks](const Var& g) { return bmm(g, a, n_blocks, true, false); };
    } else if (ta && !tb) {
        da = [b, n_blocks](const Var& g) { return bmm(b, g, n_blocks, false, true); };
        db = [a, n_blocks](const Var& g) { return bmm(a, g, n_blocks, false, false); };
    } else {
        da = [b, n_blocks](const Var& g) { return bmm(b, g, n_blocks, true, true); };
        db = [a, n_blocks](const Var& g) { return bmm(g, a, n_blocks, true, true); };
    }
    return make(std::move(v), {{a, std::move(da)}, {b, std::move(db)}});
}

Var reshape(const Var& a, Eigen::Index r, Eigen::Index c) {
    check(r * c == a->rows() * a->cols(), "reshape: element count differs");
    Mat v(r, c);
    const Eigen::Index sc = a->cols();
    for (Eigen::Index k = 0; k < r * c; ++k) v(k / c, k % c) = a->val(k / sc, k % sc);
    Eigen::Index ar = a->rows(), ac = a->cols();
    return make(std::move(v), {{a, [ar, ac](const Var& g) { return reshape(g, ar, ac); }}});
}

Var slice_cols(const Var& a, Eigen::Index j0, Eigen::Index w) {
    check(j0 >= 0 && w >= 0 && j0 + w <= a->cols(), "slice_cols: out of range");
    Mat v = a->val.middleCols(j0, w);
    Eigen::Index total = a->cols();
    return make(std::move(v), {{a, [total, j0](const Var& g) { return embed_cols(g, total, j0); }}});
}

Var concat_cols(const std::vector<Var>& parts) {
    check(!parts.empty(), "concat_cols: empty");
    Eigen::Index rows = parts[0]->rows(), cols = 0;
    for (const auto& p : parts) {
        check(p->rows() == rows, "concat_cols: row mismatch");
        cols += p->cols();
    }
    Mat v(rows, cols);
    std::vector<ParentVjp> pv;
    Eigen::Index off = 0;
    for (const auto& p : parts) {
        v.middleCols(off, p->cols()) = p->val;
        Eigen::Index j0 = off, w = p->cols();
        pv.push_back({p, [j0, w](const Var& g) { return slice_cols(g, j0, w); }});
        off += p->cols();
    }
    return make(std::move(v), std::move(pv));
}

Var softmax_rows(const Var& a) {
    Mat v(a->rows(), a->cols());
    for (Eigen::Index i = 0; i < a->rows(); ++i) {
        double mx = a->val.row(i).maxCoeff();
        Eigen::ArrayXd e = (a->val.row(i).array() - mx).exp();
        v.row(i) = (e / e.sum()).matrix();
    }
    Eigen::Index m = a->cols();
    return make(std::move(v), {{a, [a, m](const Var& g) {
                                    Var y = softmax_rows(a);
                                    Var gy = mul(g, y);
                                    return sub(gy, mul(y, rep_cols(row_sum(gy), m)));
                                }}});
}

Var log_softmax_rows(const Var& a) {
    Mat v(a->rows(), a->cols());
    for (Eigen::Index i = 0; i < a->rows(); ++i) {
        double mx = a->val.row(i).maxCoeff();
        double lse = mx + std::log((a->val.row(i).array() - mx).exp().sum());
        v.row(i) = a->val.row(i).array() - lse;
    }
    Eigen::Index m = a->cols();
    return make(std::move(v), {{a, [a, m](const Var& g) {
                                    return sub(g, mul(softmax_rows(a), rep_cols(row_sum(g), m)));
                                }}});
}

Var straight_through_onehot(const Var& y_soft) {
    Mat v = Mat::Zero(y_soft->rows(), y_soft->cols());
    for (Eigen::Index i = 0; i < y_soft->rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < y_soft->cols(); ++j)
            if (y_soft->val(i, j) > y_soft->val(i, best)) best = j;  // ties keep lowest index
        v(i, best) = 1.0;
    }
    return make(std::move(v), {{y_soft, [](const Var& g) { return g; }}});
}

Var detach(const Var& a) { return constant(a->val); }

Var im2col1d(const Var& x, Eigen::Index len, Eigen::Index ch, Eigen::Index ksize) {
    check(x->cols() == len * ch, "im2col1d: layout mismatch");
    const Eigen::Index batch = x->rows();
    const Eigen::Index pad = ksize / 2;
    Mat v = Mat::Zero(batch * len, ch * ksize);
    for (Eigen::Index b = 0; b < batch; ++b)
        for (Eigen::Index p = 0; p < len; ++p)
            for (Eigen::Index t = 0; t < ksize; ++t) {
                Eigen::Index sp = p + t - pad;
                if (sp < 0 || sp >= len) continue;
                for (Eigen::Index c = 0; c < ch; ++c)
                    v(b * len + p, t * ch + c) = x->val(b, sp * ch + c);
            }
    return make(std::move(v), {{x, [len, ch, ksize, batch](const Var& g) {
                                    return col2im1d(g, len, ch, ksize, batch);
                                }}});
}

namespace {
Var col2im1d(const Var& g, Eigen::Index len, Eigen::Index ch, Eigen::Index ksize, Eigen::Index batch) {
    const Eigen::Index pad = ksize / 2;
    Mat v = Mat::Zero(batch, len * ch);
    for (Eigen::Index b = 0; b < batch; ++b)
        for (Eigen::Index p = 0; p < len; ++p)
            for (Eigen::Index t = 0; t < ksize; ++t) {
                Eigen::Index sp = p + t - pad;
                if (sp < 0 || sp >= len) continue;
                for (Eigen::Index c = 0; c < ch; ++c)
                    v(b, sp * ch + c) += g->val(b * len + p, t * ch + c);
            }
    return make(std::move(v), {{g, [len, ch, ksize](const Var& gg) {
                                    return im2col1d(gg, len, ch, ksize);
                                }}});
}
}  // namespace

Var maxpool1d(const Var& x, Eigen::Index len, Eigen::Index ch, Eigen::Index pool) {
    check(x->cols() == len * ch, "maxpool1d: layout mismatch");
    check(pool >= 1 && len >= pool, "maxpool1d: bad pool size");
    const Eigen::Index olen = len / pool;
    const Eigen::Index batch = x->rows();
    Mat v(batch, olen * ch);
    auto idx = std::make_shared<Mat>(batch, olen * ch);
    for (Eigen::Index b = 0; b < batch; ++b)
        for (Eigen::Index p = 0; p < olen; ++p)
            for (Eigen::Index c = 0; c < ch; ++c) {
                Eigen::Index best = (p * pool) * ch + c;
                for (Eigen::Index t = 1; t < pool; ++t) {
                    Eigen::Index j = (p * pool + t) * ch + c;
                    if (x->val(b, j) > x->val(b, best)) best = j;
                }
                v(b, p * ch + c) = x->val(b, best);
                (*idx)(b, p * ch + c) = static_cast<double>(best);
            }
    Eigen::Index xcols = x->cols();
    return make(std::move(v), {{x, [idx, xcols](const Var& g) { return scatter_idx(g, idx, xcols); }}});
}

}  // namespace flowsynth::ag
