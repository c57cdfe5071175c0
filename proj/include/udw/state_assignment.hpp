#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "udw/detector.hpp"
#include "udw/geometry.hpp"
#include "udw/lattice.hpp"

namespace udw::state {

using quantum::cplx;
using quantum::Mat;
using quantum::Vec;

enum class StateErrc { InvalidRecord, InvalidRegion, Incomparable, StripRegion, UnknownOutcome, CausalityViolation, EmptyGenerators, ZeroProbability };

class StateError : public std::runtime_error {
public:
    StateError(StateErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    StateErrc code() const { return code_; }

private:
    StateErrc code_;
};

// ρ = Σ_a |v_a⟩⟨v_a| / Σ_a ‖v_a‖², branches living at the lattice reference slot.
struct Ensemble {
    std::string label;
    std::vector<Vec> branches;

    double trace() const;
    void normalize();
    // Gram matrix G_ab = ⟨v_a|v_b⟩; shares its nonzero spectrum with ρ.
    Mat gram() const;
    quantum::StateResiduals residuals() const;
    // Dense ρ, for small spaces only.
    Mat density() const;
};

enum class Mode { Selective, NonSelective, NotPerformed, Unknown };
const char* to_string(Mode m);

struct RecordEntry {
    std::string label;
    Mode mode = Mode::Unknown;
    int outcome = 1;
};

struct MeasurementRecord {
    std::vector<RecordEntry> entries;

    const RecordEntry* find(const std::string& label) const;
};

struct Scenario {
    std::shared_ptr<const lattice::LatticeField> field;
    std::vector<detector::DetectorRun> detectors;
    MeasurementRecord record;

    const detector::DetectorRun& detector(const std::string& label) const;
    std::vector<geometry::MeasurementRegion> regions() const;
    std::vector<std::string> labels() const;
    Ensemble initial() const;
};

// Composition of Kraus updates in chronological order.
class Channel {
public:
    struct Step {
        std::string label;
        Mode mode;
        int outcome;
        detector::KrausSet kraus;
    };

    Channel(std::shared_ptr<const lattice::LatticeField> field, std::vector<Step> steps)
        : field_(std::move(field)), steps_(std::move(steps)) {}

    Ensemble apply(const Ensemble& rho) const;
    const std::vector<Step>& steps() const { return steps_; }

private:
    std::shared_ptr<const lattice::LatticeField> field_;
    std::vector<Step> steps_;
};

// Kraus operator of a detector as a Heisenberg operator at the reference slot.
Vec apply_kraus(const lattice::LatticeField& f, const detector::KrausSet& k, int outcome, const Vec& v);

Channel update_channel(const MeasurementRecord& record, const Scenario& s);

// Smeared field φ_f = Σ w_j φ_j at one slot, supported in a thin box around the slot time.
struct Generator {
    std::string name;
    int slot = 0;
    int first_site = 0;
    std::vector<double> weights;
    geometry::BoxRegion support;
};

struct GeneratorOptions {
    int slot_min = -1;
    int slot_max = 4;
    std::vector<int> scales{1, 2};
    double half_width = 0.1;     // in units of the spacing
    double half_duration = 0.05; // in units of the spacing
    int degree = 2;
};

std::vector<Generator> generator_library(const lattice::LatticeField& f, const GeneratorOptions& opt = {});

struct Region {
    std::string name;
    std::function<bool(const geometry::BoxRegion&)> contains;
};

// Relation queries over the scenario's measurements, e.g. S_AB, P+_A\P+_B, P+_A∩P+_B, P-_B ("&" also accepted for ∩).
Region named_region(const std::string& name, const Scenario& s);
Region region_of_set(const std::string& name, const geometry::RegionSet& r);

std::vector<Generator> generators_in(const Region& r, const std::vector<Generator>& library);

// Largest |Tr[(ρ−ρ′)L]| over monomials of the generators up to the given degree.
double max_deviation(const Ensemble& a, const Ensemble& b, const std::vector<Generator>& gens,
                     const lattice::LatticeField& f, int degree = 2);
bool equivalent_on_region(const Ensemble& a, const Ensemble& b, const std::vector<Generator>& gens,
                          const lattice::LatticeField& f, double tol, int degree = 2);

enum class Semantics { PGMClasses, AlgebraicGlobal };
const char* to_string(Semantics s);

struct RegionStateClass {
    std::string region;
    std::vector<geometry::Relation> relations;  // one per scenario detector
    Ensemble representative;
    std::vector<Generator> generators;
};

RegionStateClass assign_state(const Region& r, const Scenario& s, Semantics sem,
                              const GeneratorOptions& opt = {});

// ρ₁…ρ₉ for spacelike detectors A, B with selected outcomes a, b.
std::vector<Ensemble> states_one_to_nine(const Scenario& s, const std::string& a_label, const std::string& b_label,
                                         int a = 1, int b = 1);

Ensemble knowledge_state(const geometry::SpacetimePoint& observer, const MeasurementRecord& known, const Scenario& s);

}  // namespace udw::state
