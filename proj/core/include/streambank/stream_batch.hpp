#pragma once

#include <functional>
#include <vector>

#include "streambank/matrix.hpp"

namespace streambank {

struct LatentState {
    long frame_index = 0;
    int step = 0;     // denoising steps remaining; slot is emitted after step 1 runs
    Matrix latent;
};

// Rolling batch of S latents, each at a different denoising step.  One tick
// advances every slot by one step, emits the finished slot and admits one new
// latent at the deepest step, so after warm-up the batch always holds steps
// {S, S-1, ..., 1} for consecutive frame indices.
class DenoisingBatch {
public:
    using DenoiseFn = std::function<Matrix(const Matrix& latent, int step)>;

    struct Emission {
        long frame_index = 0;
        Matrix latent;
    };

    // Fills all S slots with copies of the first latent.  The synthetic slots
    // get negative frame indices (-S+1 .. -1) so their emissions are easy to
    // recognize as warm-up and drop downstream.
    static DenoisingBatch warm_start(const Matrix& first_latent, int steps);

    // Advances every slot one step via `denoise`, pops the slot that reached
    // step 0 as the emission, then admits `new_latent` at the deepest step
    // with the next consecutive frame index.
    Emission tick(Matrix new_latent, const DenoiseFn& denoise);

    const std::vector<LatentState>& slots() const { return slots_; }
    int steps() const { return steps_; }
    long newest_frame() const { return slots_.front().frame_index; }

private:
    DenoisingBatch() = default;

    int steps_ = 0;
    std::vector<LatentState> slots_; // descending step order; front is newest
};

} // namespace streambank
