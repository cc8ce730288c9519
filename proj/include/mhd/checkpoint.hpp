#pragma once

#include <string>

#include "mhd/mhvq.hpp"
#include "mhd/mom.hpp"

namespace mhd {

// Versioned JSON checkpoints: architecture descriptor plus all parameter
// values (doubles round-trip exactly). Format documented in the README.
inline constexpr int kCheckpointVersion = 1;

void save_mom(const MoMModel& model, const std::string& path);
MoMModel load_mom(const std::string& path);

void save_mhvq(const MHVQModel& model, const std::string& path);
// Posterior table is optional and stored alongside the model when present.
void save_mhvq(const MHVQModel& model, const PosteriorTable& posterior, const std::string& path);
MHVQModel load_mhvq(const std::string& path, PosteriorTable* posterior = nullptr);

}  // namespace mhd
