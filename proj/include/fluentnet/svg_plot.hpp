#pragma once

#include <string>
#include <vector>

#include "fluentnet/metrics.hpp"

namespace fluentnet {

/// Four stacked panels over the replay timeline: node complexity, evaluation
/// duration, propagated statement counts, and the recognition marks against
/// their label windows. Written as a self-contained SVG file.
void render_trace_svg(const std::string& path,
                      const std::vector<EvalSample>& samples,
                      const Scoreboard& board,
                      const std::vector<LabelWindow>& labels);

/// Evaluation duration against node complexity, one dot per sample.
void render_scatter_svg(const std::string& path,
                        const std::vector<EvalSample>& samples);

}  // namespace fluentnet
