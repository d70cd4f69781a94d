#include "streambank/stream_batch.hpp"

#include "streambank/errors.hpp"

namespace streambank {

DenoisingBatch DenoisingBatch::warm_start(const Matrix& first_latent, int steps) {
    if (steps < 1) {
        throw ConfigError("warm_start: steps must be >= 1");
    }
    if (first_latent.rows() == 0 || first_latent.cols() == 0) {
        throw ShapeError("warm_start: latent must be non-empty");
    }
    DenoisingBatch batch;
    batch.steps_ = steps;
    batch.slots_.reserve(steps);
    for (int s = steps; s >= 1; --s) {
        // Step s holds frame index -(steps - s): frame 0 at the deepest step,
        // synthetic negative indices behind it.
        batch.slots_.push_back(LatentState{static_cast<long>(s - steps), s, first_latent});
    }
    return batch;
}

DenoisingBatch::Emission DenoisingBatch::tick(Matrix new_latent, const DenoiseFn& denoise) {
    const Matrix& ref = slots_.front().latent;
    if (!new_latent.same_shape(ref)) {
        throw ShapeError("tick: new latent shape does not match batch");
    }
    long newest = slots_.front().frame_index;
    for (LatentState& slot : slots_) {
        Matrix out = denoise(slot.latent, slot.step);
        if (!out.same_shape(slot.latent)) {
            throw ShapeError("tick: denoiser changed the latent shape");
        }
        slot.latent = std::move(out);
        slot.step -= 1;
    }
    Emission emitted{slots_.back().frame_index, std::move(slots_.back().latent)};
    slots_.pop_back();
    slots_.insert(slots_.begin(), LatentState{newest + 1, steps_, std::move(new_latent)});
    return emitted;
}

} // namespace streambank
