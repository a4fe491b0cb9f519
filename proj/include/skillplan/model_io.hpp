#pragma once

#include "skillplan/pinn.hpp"
#include "skillplan/rollout.hpp"

#include <istream>
#include <ostream>
#include <string>

namespace skillplan::model_io {

/// Current version of the text model format.
inline constexpr int kFormatVersion = 1;

/// Text record: format tag and version, schema id, physics constants,
/// epsilon, latent parameter, normalisation boxes, layer widths, then every
/// network parameter (row-major weights then bias, layer by layer) at full
/// precision.
void write_model(std::ostream& os, const pinn::PinnModel& model);
pinn::PinnModel read_model(std::istream& is);

void save_model(const std::string& path, const pinn::PinnModel& model);
pinn::PinnModel load_model(const std::string& path);

/// One file per skill, named "<skill>.model", inside `directory`.
void save_model_set(const std::string& directory, const rollout::ModelSet& models);
rollout::ModelSet load_model_set(const std::string& directory);

/// CSV export of a training set: kind,<inputs...>,<outputs...>, one row per
/// supervised sample ("data") or collocation point ("collocation").
void write_dataset(std::ostream& os, const pinn::SkillSchema& schema, const pinn::TrainSet& set);

/// CSV loss curve: cycle,total,data,physics.
void write_history(std::ostream& os, const pinn::TrainingHistory& history);

}  // namespace skillplan::model_io
