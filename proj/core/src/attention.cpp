// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/attention.hpp"

#include <cmath>
#include <limits>

#include "sgedit/error.hpp"

namespace sgedit::attn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw Error(ErrorCode::ShapeMismatch, std::string(what) + " has non-finite entries");
}

void check_bias(const Matrix& bias, Eigen::Index rows, Eigen::Index cols) {
    if (bias.rows() != rows || bias.cols() != cols) throw Error(ErrorCode::ShapeMismatch, "bias shape does not match scores");
    for (Eigen::Index i = 0; i < bias.size(); ++i) {
        const double b = bias.data()[i];
        if (std::isnan(b) || b == std::numeric_limits<double>::infinity()) {
            throw Error(ErrorCode::ShapeMismatch, "bias entries must be finite or -inf");
        }
    }
}

}  // namespace

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        double m = kNegInf;
        for (Eigen::Index j = 0; j < logits.cols(); ++j) m = std::max(m, logits(i, j));
        if (m == kNegInf) throw Error(ErrorCode::DegenerateRow, "query attends to no key", std::to_string(i));
        double sum = 0.0;
        for (Eigen::Index j = 0; j < logits.cols(); ++j) {
            const double e = logits(i, j) == kNegInf ? 0.0 : std::exp(logits(i, j) - m);
            out(i, j) = e;
            sum += e;
        }
        out.row(i) /= sum;
    }
    return out;
}

Matrix scaled_scores(const Matrix& q, const Matrix& k) {
    if (q.cols() == 0 || q.cols() != k.cols()) throw Error(ErrorCode::ShapeMismatch, "Q and K must share a positive width");
    require_finite(q, "Q");
    require_finite(k, "K");
    return (q * k.transpose()) / std::sqrt(static_cast<double>(q.cols()));
}

Matrix attention_weights(const Matrix& q, const Matrix& k, const Matrix* bias) {
    if (q.cols() == 0 || q.cols() != k.cols()) throw Error(ErrorCode::ShapeMismatch, "Q and K must share a positive width");
    require_finite(q, "Q");
    require_finite(k, "K");
    Matrix logits = q * k.transpose();
    if (bias != nullptr) {
        check_bias(*bias, logits.rows(), logits.cols());
        logits += *bias;
    }
    logits /= std::sqrt(static_cast<double>(q.cols()));
    return softmax_rows(logits);
}

Matrix attention(const AttentionTensors& t, const Matrix* bias) {
    if (t.k.rows() != t.v.rows()) throw Error(ErrorCode::ShapeMismatch, "K and V must have the same number of rows");
    require_finite(t.v, "V");
    return attention_weights(t.q, t.k, bias) * t.v;
}

Matrix removal_bias(const RegionMask& key_mask, Eigen::Index n_q) {
    const auto bits = key_mask.bits();
    const auto n_k = static_cast<Eigen::Index>(bits.size());
    Matrix x = Matrix::Zero(n_q, n_k);
    Eigen::Index masked = 0;
    for (Eigen::Index j = 0; j < n_k; ++j) {
        if (bits[static_cast<std::size_t>(j)]) {
            x.col(j).setConstant(kNegInf);
            ++masked;
        }
    }
    if (masked == n_k) throw Error(ErrorCode::AllMasked, "every key position is masked");
    return x;
}

Matrix removal_attention(const Matrix& q, const Matrix& k_src, const Matrix& v_src, const RegionMask& key_mask) {
    if (static_cast<std::size_t>(k_src.rows()) != key_mask.size().area()) {
        throw Error(ErrorCode::ShapeMismatch, "mask length must equal the number of keys");
    }
    const Matrix bias = removal_bias(key_mask, q.rows());
    return attention({q, k_src, v_src}, &bias);
}

Correspondence build_correspondence(const SegmentMap& seg, KeyKind kind, const std::vector<int>& token_segments) {
    const auto labels = seg.labels();
    const auto n_q = static_cast<Eigen::Index>(labels.size());
    const double total = static_cast<double>(labels.size());
    std::vector<double> area(static_cast<std::size_t>(seg.max_label()) + 1, 0.0);
    for (int l : labels) area[static_cast<std::size_t>(l)] += 1.0;
    for (auto& a : area) a /= total;

    Correspondence c;
    if (kind == KeyKind::Self) {
        c.r.resize(n_q, n_q);
        c.s.resize(n_q, n_q);
        for (Eigen::Index i = 0; i < n_q; ++i) {
            const int li = labels[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j < n_q; ++j) {
                c.r(i, j) = li == labels[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
                c.s(i, j) = area[static_cast<std::size_t>(li)];
            }
        }
        return c;
    }

    const auto n_k = static_cast<Eigen::Index>(token_segments.size());
    for (std::size_t j = 0; j < token_segments.size(); ++j) {
        const int s = token_segments[j];
        if (s < 0 || s >= static_cast<int>(area.size()) || area[static_cast<std::size_t>(s)] == 0.0) {
            throw Error(ErrorCode::UnmappedToken, "token maps to a segment absent from the map", std::to_string(j));
        }
    }
    c.r.resize(n_q, n_k);
    c.s.resize(n_q, n_k);
    for (Eigen::Index i = 0; i < n_q; ++i) {
        const int li = labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n_k; ++j) {
            const int sj = token_segments[static_cast<std::size_t>(j)];
            c.r(i, j) = li == sj ? 1.0 : 0.0;
            c.s(i, j) = area[static_cast<std::size_t>(sj)];
        }
    }
    return c;
}

Matrix insertion_bias(const Matrix& scores, const Correspondence& corr, double lambda) {
    if (!(lambda >= 0.0)) throw Error(ErrorCode::NegativeLambda, "lambda must be non-negative");
    if (corr.r.rows() != scores.rows() || corr.r.cols() != scores.cols() || corr.s.rows() != scores.rows() ||
        corr.s.cols() != scores.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "correspondence shape does not match scores");
    }
    require_finite(scores, "scores");
    Matrix x(scores.rows(), scores.cols());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const double hi = scores.row(i).maxCoeff();
        const double lo = scores.row(i).minCoeff();
        for (Eigen::Index j = 0; j < scores.cols(); ++j) {
            const double damp = lambda * (1.0 - corr.s(i, j));
            const double pos = hi - scores(i, j);
            const double neg = scores(i, j) - lo;
            x(i, j) = corr.r(i, j) * pos * damp - (1.0 - corr.r(i, j)) * neg * damp;
        }
    }
    return x;
}

Matrix modulated_attention(const AttentionTensors& t, const Correspondence& corr, double lambda) {
    if (t.k.rows() != t.v.rows()) throw Error(ErrorCode::ShapeMismatch, "K and V must have the same number of rows");
    const Matrix scores = scaled_scores(t.q, t.k);
    const Matrix x = insertion_bias(scores, corr, lambda);
    return softmax_rows(scores + x) * t.v;
}

double lambda_schedule(double t, double lambda_max) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::OutOfRange, "normalized timestep must lie in [0,1]");
    const double t2 = t * t;
    return lambda_max * t2 * t2;
}

}  // namespace sgedit::attn
