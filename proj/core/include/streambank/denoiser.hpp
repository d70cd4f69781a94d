#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "streambank/feature_bank.hpp"
#include "streambank/fusion.hpp"
#include "streambank/matrix.hpp"
#include "streambank/stream.hpp"

namespace streambank {

// Frozen random projections for one transformer-style block.  Entries are
// scaled by 1/sqrt(fan-in) so activations keep a stable magnitude.
struct BlockWeights {
    Matrix wq;
    Matrix wk;
    Matrix wv;
    Matrix w1;
    Matrix w2;
};

BlockWeights make_block_weights(std::uint64_t model_seed, int block_index, int dim, int hidden);

// Patch-to-token projection standing in for a latent encoder; fixed per run.
Matrix make_embed_projection(std::uint64_t model_seed, int patch, int dim);

struct PipelineConfig {
    int blocks = 4;
    int dim = 16;
    int hidden = 32;
    int steps = 4;
    float eta = 0.3f;        // step size of the denoising update
    float sigma_init = 0.4f; // noise added to each frame's tokens on enqueue
    std::uint64_t model_seed = 1;
    bool ea_enabled = true;  // attend over banked keys/values
    BankConfig bank;
    FusionConfig fusion;

    void validate() const;
};

// Per-block capture of the tensors the bank stores.
struct BlockCapture {
    Matrix k;
    Matrix v;
    Matrix o;
};

// Optional deep inspection of a single (frame, step, layer) block call.
struct BlockTrace {
    Matrix query;                        // Q rows of the traced call
    Matrix banked_keys;                  // banked K rows the call attended over
    std::vector<FusionDecision> fusion_mask;
};

// One attention + feed-forward block:
//   K = x Wk, V = x Wv, Q = x Wq
//   a = attention over [K; K_bank], [V; V_bank]
//   f = tanh(a W1) W2 + a
//   o = fuse(f, O_bank) on active blocks, else f
// Returns o; `capture` receives (K, V, o) for the bank, `attn_logits` is
// incremented by rows * (rows + banked rows).
Matrix block_forward(const Matrix& x, const BlockWeights& w, const FeatureTriple& banked,
                     const PipelineConfig& cfg, int layer, BlockCapture* capture = nullptr,
                     BlockTrace* trace = nullptr, std::uint64_t* attn_logits = nullptr);

class ToyDenoiser {
public:
    explicit ToyDenoiser(const PipelineConfig& cfg);

    const PipelineConfig& config() const { return cfg_; }
    const std::vector<BlockWeights>& weights() const { return weights_; }

    // Runs all blocks on z and takes one denoising step:
    //   z' = z - eta * (final block output)
    // Captured per-layer features land in `capture` under (step, layer).
    Matrix denoise_step(const Matrix& z, int step, const FeatureBank& bank,
                        FrameFeatures* capture = nullptr, std::uint64_t* attn_logits = nullptr,
                        BlockTrace* trace = nullptr, int trace_layer = -1) const;

private:
    PipelineConfig cfg_;
    std::vector<BlockWeights> weights_;
};

// Capture request for run_stream: step/layer select the block call, frame -1
// captures every real frame (needed for feature projections over time).
struct CaptureSpec {
    long frame = -1;
    int step = 1;
    int layer = 0;
};

struct RunOptions {
    std::optional<CaptureSpec> capture;
};

struct FrameRunStats {
    long frame = 0;
    std::uint64_t attn_logits = 0;
};

struct CaptureData {
    std::map<long, BlockTrace> traces;        // per captured frame
    std::map<long, Matrix> block_outputs;     // captured O at (step, layer)
};

struct RunResult {
    std::vector<Matrix> outputs;              // one emitted latent per real frame
    std::vector<FrameRunStats> frame_stats;
    std::uint64_t attn_logits_total = 0;
    std::size_t bank_rows = 0;                // largest per-key row count at run end
    std::size_t bank_floats = 0;
    std::size_t pipeline_floats = 0;          // latents held by the rolling batch
    FeatureBank bank;                         // final bank state (for snapshots)
    CaptureData capture;
};

// Pushes every frame of the stream through the rolling denoising batch.  Each
// enqueued frame is embedded and perturbed with seeded noise; emitted frames
// feed the bank at the configured interval.  Warm-up emissions (negative
// indices) are dropped, and the pipe is flushed with zero latents so every
// real frame is emitted: outputs[t] is frame t after all `steps` passes.
RunResult run_stream(const Stream& stream, const PipelineConfig& cfg, const RunOptions& options = {});

} // namespace streambank
