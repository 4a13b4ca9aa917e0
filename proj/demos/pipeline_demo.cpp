// Minimal library walkthrough: synthesize a labeled recording, train a
// classifier on 70% of the segments, and score the held-out 30%.

#include <cstdio>

#include "fanwatt/eval.hpp"
#include "fanwatt/synth.hpp"

int main() {
    using namespace fanwatt;

    FanProfile fan;                     // 7 blades, 2000-6000 RPM
    RoomProfile room;                   // quiet room, 100-300 W server
    room.broadband_noise_level = 0.05;  // a little background hiss

    // 40 two-second segments cycling through 4 wattage levels.
    std::vector<double> watts = wattage_levels(equally_spaced_levels(room, 4), 40);
    SynthResult recording = synth_dataset(fan, room, watts, 2.0, 16000, 1);

    // Pair each power reading with its 2 s of audio, then extract the reduced
    // (15 Hz max-binned) spectral features.
    std::vector<AlignedSegment> pairs = segment_and_align(recording.signal, recording.trace);
    LabeledFeatures data = extract_dataset_features(pairs, BandSpec{}, Approach::reduced);

    PipelineConfig config;
    config.train.seed = 1;
    config.split.seed = 1;
    TrainOutcome outcome = train_pipeline(data, config);
    EvalReport report = evaluate_holdout(data, outcome);

    std::printf("network: %d -> %d -> %d -> %d\n", outcome.model.net.shape.inputs,
                outcome.model.net.shape.hidden1, outcome.model.net.shape.hidden2,
                outcome.model.net.shape.outputs);
    std::printf("final training mse: %.6f\n", outcome.mse_history.back());
    std::fputs(report_to_text(report).c_str(), stdout);

    // Classify one segment directly.
    int cls = predict(outcome.model, data.features.front());
    std::printf("first segment -> class %d (%s), true watts %.1f\n", cls, class_name(cls),
                data.watts.front());
    return 0;
}
