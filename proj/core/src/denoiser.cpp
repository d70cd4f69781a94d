#include "streambank/denoiser.hpp"

#include <cmath>

#include "streambank/attention.hpp"
#include "streambank/errors.hpp"
#include "streambank/stream_batch.hpp"

namespace streambank {

namespace {

constexpr std::uint64_t kWeightSalt = 0x17EA;
constexpr std::uint64_t kEmbedSalt = 0xE3BED;
constexpr std::uint64_t kEnqueueSalt = 0x401E;

} // namespace

BlockWeights make_block_weights(std::uint64_t model_seed, int block_index, int dim, int hidden) {
    Rng rng(hash_combine(hash_combine(model_seed, kWeightSalt), static_cast<std::uint64_t>(block_index)));
    float dim_scale = 1.0f / std::sqrt(static_cast<float>(dim));
    float hidden_scale = 1.0f / std::sqrt(static_cast<float>(hidden));
    BlockWeights w;
    w.wq = scale(randn(rng, dim, dim), dim_scale);
    w.wk = scale(randn(rng, dim, dim), dim_scale);
    w.wv = scale(randn(rng, dim, dim), dim_scale);
    w.w1 = scale(randn(rng, dim, hidden), dim_scale);
    w.w2 = scale(randn(rng, hidden, dim), hidden_scale);
    return w;
}

Matrix make_embed_projection(std::uint64_t model_seed, int patch, int dim) {
    Rng rng(hash_combine(model_seed, kEmbedSalt));
    std::size_t in = static_cast<std::size_t>(patch) * patch;
    return scale(randn(rng, in, dim), 1.0f / std::sqrt(static_cast<float>(in)));
}

void PipelineConfig::validate() const {
    if (blocks < 1) {
        throw ConfigError("pipeline: blocks must be >= 1");
    }
    if (dim < 1 || hidden < 1) {
        throw ConfigError("pipeline: dim and hidden must be >= 1");
    }
    if (steps < 1) {
        throw ConfigError("pipeline: steps must be >= 1");
    }
    if (eta <= 0.0f || eta >= 1.0f) {
        throw ConfigError("pipeline: eta must be in (0, 1)");
    }
    if (sigma_init < 0.0f) {
        throw ConfigError("pipeline: sigma_init must be >= 0");
    }
    bank.validate();
    fusion.validate();
}

Matrix block_forward(const Matrix& x, const BlockWeights& w, const FeatureTriple& banked,
                     const PipelineConfig& cfg, int layer, BlockCapture* capture,
                     BlockTrace* trace, std::uint64_t* attn_logits) {
    Matrix k = matmul(x, w.wk);
    Matrix v = matmul(x, w.wv);
    Matrix q = matmul(x, w.wq);

    const Matrix empty(0, 0);
    const Matrix& bank_k = cfg.ea_enabled ? banked.k : empty;
    const Matrix& bank_v = cfg.ea_enabled ? banked.v : empty;
    Matrix a = extended_attention(AttentionInput{q, k, v}, bank_k, bank_v);
    if (attn_logits) {
        *attn_logits += static_cast<std::uint64_t>(x.rows()) * (x.rows() + bank_k.rows());
    }

    Matrix f = add(matmul(tanh_of(matmul(a, w.w1)), w.w2), a);

    Matrix o;
    if (should_fuse(layer, cfg.fusion)) {
        o = fuse(f, banked.o, cfg.fusion, trace ? &trace->fusion_mask : nullptr);
    } else {
        o = f;
        if (trace) {
            // Report what the gate would decide here, but nothing was blended.
            fuse(f, banked.o, cfg.fusion, &trace->fusion_mask);
            for (FusionDecision& d : trace->fusion_mask) {
                d.fused = false;
            }
        }
    }
    if (trace) {
        trace->query = q;
        trace->banked_keys = bank_k;
    }
    if (capture) {
        capture->k = std::move(k);
        capture->v = std::move(v);
        capture->o = o;
    }
    return o;
}

ToyDenoiser::ToyDenoiser(const PipelineConfig& cfg) : cfg_(cfg) {
    weights_.reserve(cfg_.blocks);
    for (int b = 0; b < cfg_.blocks; ++b) {
        weights_.push_back(make_block_weights(cfg_.model_seed, b, cfg_.dim, cfg_.hidden));
    }
}

Matrix ToyDenoiser::denoise_step(const Matrix& z, int step, const FeatureBank& bank,
                                 FrameFeatures* capture, std::uint64_t* attn_logits,
                                 BlockTrace* trace, int trace_layer) const {
    Matrix x = z;
    for (int layer = 0; layer < cfg_.blocks; ++layer) {
        FeatureTriple banked = bank.fetch(step, layer);
        BlockCapture cap;
        BlockTrace* layer_trace = (trace && layer == trace_layer) ? trace : nullptr;
        x = block_forward(x, weights_[layer], banked, cfg_, layer, capture ? &cap : nullptr,
                          layer_trace, attn_logits);
        if (capture) {
            capture->features[{step, layer}] = std::move(cap);
        }
    }
    return sub(z, scale(x, cfg_.eta));
}

RunResult run_stream(const Stream& stream, const PipelineConfig& cfg, const RunOptions& options) {
    if (stream.frames.empty()) {
        throw ConfigError("run_stream: stream has no frames");
    }
    const long total = static_cast<long>(stream.frames.size());
    const int patch = stream.spec.patch;
    const std::size_t n = static_cast<std::size_t>(stream.spec.tokens());
    if (stream.spec.dim != cfg.dim) {
        throw ConfigError("run_stream: stream dim does not match pipeline dim");
    }

    ToyDenoiser denoiser(cfg);
    FeatureBank bank(cfg.bank);
    Matrix projection = make_embed_projection(cfg.model_seed, patch, cfg.dim);

    auto enqueue = [&](long t) {
        Matrix tokens = embed_frame(stream.frames[t].grid, projection, patch);
        if (cfg.sigma_init > 0.0f) {
            Rng noise(hash_combine(hash_combine(cfg.model_seed, kEnqueueSalt),
                                   static_cast<std::uint64_t>(t)));
            tokens = add(tokens, scale(randn(noise, n, cfg.dim), cfg.sigma_init));
        }
        return tokens;
    };

    RunResult result;
    result.outputs.resize(total);
    result.pipeline_floats = static_cast<std::size_t>(cfg.steps) * n * cfg.dim;
    std::map<long, FrameFeatures> in_flight;
    std::map<long, std::uint64_t> frame_logits;

    DenoisingBatch batch = DenoisingBatch::warm_start(enqueue(0), cfg.steps);

    // Ticks 1..total-1 ingest the remaining frames; `steps` flush ticks with
    // zero latents push the last in-flight frames out.
    const long last_tick = total - 1 + cfg.steps;
    for (long tick = 1; tick <= last_tick; ++tick) {
        Matrix incoming = tick < total ? enqueue(tick) : Matrix(n, cfg.dim);

        std::map<int, long> frame_by_step;
        for (const LatentState& slot : batch.slots()) {
            frame_by_step[slot.step] = slot.frame_index;
        }

        auto emission = batch.tick(std::move(incoming), [&](const Matrix& z, int step) {
            long frame = frame_by_step.at(step);
            bool real = frame >= 0 && frame < total;
            FrameFeatures* capture = nullptr;
            if (real) {
                capture = &in_flight[frame];
                capture->frame_index = frame;
            }
            BlockTrace* trace = nullptr;
            if (options.capture && real && step == options.capture->step &&
                (options.capture->frame < 0 || options.capture->frame == frame)) {
                trace = &result.capture.traces[frame];
            }
            std::uint64_t logits = 0;
            Matrix out = denoiser.denoise_step(z, step, bank, capture, &logits, trace,
                                               options.capture ? options.capture->layer : -1);
            result.attn_logits_total += logits;
            if (real) {
                frame_logits[frame] += logits;
            }
            return out;
        });

        if (emission.frame_index >= 0 && emission.frame_index < total) {
            long f = emission.frame_index;
            result.outputs[f] = std::move(emission.latent);
            auto it = in_flight.find(f);
            if (it != in_flight.end()) {
                if (options.capture) {
                    auto feat = it->second.features.find({options.capture->step, options.capture->layer});
                    if (feat != it->second.features.end() &&
                        (options.capture->frame < 0 || options.capture->frame == f)) {
                        result.capture.block_outputs[f] = feat->second.o;
                    }
                }
                bank.maybe_update(it->second);
                in_flight.erase(it);
            }
        }
    }

    result.frame_stats.reserve(frame_logits.size());
    for (const auto& [frame, logits] : frame_logits) {
        result.frame_stats.push_back(FrameRunStats{frame, logits});
    }
    result.bank_rows = bank.max_rows_per_key();
    result.bank_floats = bank.total_floats();
    result.bank = std::move(bank);
    return result;
}

} // namespace streambank
