// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <Eigen/Core>

#include "sgedit/mask.hpp"

namespace sgedit::attn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Q is n_q x d, K is n_k x d, V is n_k x d_v.
struct AttentionTensors {
    Matrix q;
    Matrix k;
    Matrix v;
};

/// Row-wise softmax; -inf entries get weight 0. Throws DegenerateRow when a
/// row has no finite entry.
Matrix softmax_rows(const Matrix& logits);

/// QK^T / sqrt(d).
Matrix scaled_scores(const Matrix& q, const Matrix& k);

/// softmax((QK^T + X) / sqrt(d)), X = 0 when `bias` is null.
Matrix attention_weights(const Matrix& q, const Matrix& k, const Matrix* bias = nullptr);

/// attention_weights(...) * V.
Matrix attention(const AttentionTensors& t, const Matrix* bias = nullptr);

/// X[i,j] = -inf where the flattened key mask is set, 0 elsewhere.
/// Throws AllMasked when every key is masked.
Matrix removal_bias(const RegionMask& key_mask, Eigen::Index n_q);

/// Attention of Q over the cached source keys/values with masked keys excluded.
Matrix removal_attention(const Matrix& q, const Matrix& k_src, const Matrix& v_src, const RegionMask& key_mask);

enum class KeyKind { Self, Cross };

/// R marks query/key pairs whose score is raised (1) or lowered (0); S holds
/// the area fraction of the segment governing each pair.
struct Correspondence {
    Matrix r;
    Matrix s;
};

/// Self: R[i,j] = 1 iff pixels i and j share a label, S = area of pixel i's
/// segment. Cross: R[i,j] = 1 iff pixel i lies in token j's segment, S = area
/// of token j's segment. `token_segments[j]` is token j's segment (0 for
/// non-object tokens). Areas are fractions of the canvas.
Correspondence build_correspondence(const SegmentMap& seg, KeyKind kind, const std::vector<int>& token_segments = {});

/// X = l*R.*Xpos.*(1-S) - l*(1-R).*Xneg.*(1-S), Xpos = rowmax - score,
/// Xneg = score - rowmin. For l*(1-S) <= 1 every modulated score stays within
/// its row's original [min, max]. Throws NegativeLambda, ShapeMismatch.
Matrix insertion_bias(const Matrix& scores, const Correspondence& corr, double lambda);

/// softmax(QK^T/sqrt(d) + X) V with X = insertion_bias of the scaled scores.
/// Equivalent to attention() with a bias of sqrt(d) * X.
Matrix modulated_attention(const AttentionTensors& t, const Correspondence& corr, double lambda);

/// lambda_max * t^4 for normalized time t in [0,1]; throws OutOfRange.
double lambda_schedule(double t, double lambda_max = 1.0);

}  // namespace sgedit::attn
