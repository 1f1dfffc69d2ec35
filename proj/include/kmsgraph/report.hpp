#pragma once

#include <string>
#include <vector>

#include "kmsgraph/ends.hpp"
#include "kmsgraph/families.hpp"
#include "kmsgraph/harmonic.hpp"
#include "kmsgraph/martin.hpp"
#include "kmsgraph/series.hpp"
#include "kmsgraph/spectral.hpp"
#include "kmsgraph/transform.hpp"

namespace kmsgraph {

json names_of(const Digraph& g, const std::vector<int>& vs);
json levels_of(const Digraph& g, const std::vector<std::vector<int>>& levels);
// NaN and infinities become null.
json jnum(double x);

json to_json(const SeriesEstimate& e);
json to_json(const Digraph& g, const HarmonicVector& h);
json to_json(const Digraph& g, const ResidualReport& r);
json to_json(const EntropyEstimate& e);
json to_json(const RecurrenceReport& r);
json to_json(const TemperatureClassification& t);
json to_json(const KernelValue& k);
json to_json(const Digraph& g, const RayWeight& w);
json to_json(const Digraph& g, const SummabilityReport& s);
json to_json(const Digraph& g, const BoundaryLimitReport& b);
json to_json(const Digraph& g, const EndApprox& e);
json to_json(const Digraph& g, const BratteliEnds& b);
json to_json(const Digraph& g, const MinimalityReport& m);
json to_json(const AlmostUndirected& a);
json to_json(const Digraph& g, const Decomposition& d);
json to_json(const Digraph& g, const Decomposition& d, const LevelChainSet& s);
json to_json(const SourceTransfer& t);
json to_json(const GlueCount& c);

// Flattens to (JSON pointer, scalar) rows.
std::vector<std::pair<std::string, std::string>> flatten(const json& j);
std::string render(const json& j, const std::string& format);

}  // namespace kmsgraph
