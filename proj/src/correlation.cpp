#include "udw/correlation.hpp"

#include <cmath>
#include <sstream>

namespace udw::correlation {

using geometry::GeometryErrc;
using geometry::GeometryError;
using geometry::Relation;
using state::Mode;
using state::StateErrc;
using state::StateError;

Insertion insertion_at(const lattice::LatticeParams& p, const geometry::SpacetimePoint& x, int width,
                       const state::GeneratorOptions& opt) {
    if (x.x.size() != 1) throw quantum::QuantumError(quantum::QuantumErrc::DimensionMismatch, "lattice insertions need d = 2");
    if (width < 1) throw quantum::QuantumError(quantum::QuantumErrc::InvalidState, "insertion width must be positive");
    const double a = p.spacing;
    const int k = static_cast<int>(std::floor(x.t / a + 0.5));
    const int j = static_cast<int>(std::lround(x.x[0] / a));
    if (j < 0 || j + width > p.sites) {
        std::ostringstream os;
        os << "insertion at x = " << x.x[0] << " falls outside the lattice";
        throw quantum::QuantumError(quantum::QuantumErrc::IndexOutOfRange, os.str());
    }
    Insertion in;
    in.center = x;
    in.op.slot = k;
    in.op.first_site = j;
    in.op.weights.assign(width, 1.0 / width);
    std::ostringstream name;
    name << "phi(" << x.t << "," << x.x[0] << ")";
    in.op.name = name.str();
    in.op.support = geometry::BoxRegion::make({k * a - opt.half_duration * a, {j * a - opt.half_width * a}},
                                              {k * a + opt.half_duration * a, {(j + width - 1) * a + opt.half_width * a}});
    return in;
}

namespace {

// ⟨v| Φ₁⋯Φ_n |w⟩ for unnormalised vectors.
cplx matrix_element(const Vec& v, const Vec& w, const std::vector<Insertion>& ins, const std::vector<Mat>& blocks,
                    const lattice::LatticeField& f) {
    Vec u = w;
    for (std::size_t i = ins.size(); i-- > 0;)
        u = f.apply_at(u, ins[i].op.slot, ins[i].op.first_site, static_cast<int>(ins[i].op.weights.size()), blocks[i]);
    return v.dot(u);
}

std::vector<Mat> blocks_of(const std::vector<Insertion>& ins, const lattice::LatticeField& f) {
    std::vector<Mat> out;
    for (const auto& i : ins) {
        if (i.op.weights.empty()) throw quantum::QuantumError(quantum::QuantumErrc::InvalidState, "insertion has no coefficients");
        out.push_back(f.smeared_block(i.op.weights));
    }
    return out;
}

bool definite(Relation r) { return r == Relation::Spacelike || r == Relation::InPPlus || r == Relation::InPMinus; }

std::vector<Relation> relations_to(const std::vector<Insertion>& ins, const geometry::MeasurementRegion& m) {
    std::vector<Relation> out;
    for (const auto& i : ins) {
        const Relation r = geometry::classify(i.op.support, m);
        if (!definite(r))
            throw GeometryError(GeometryErrc::StripPoint, i.op.name + " lies in " + geometry::to_string(r) + " of " + m.label);
        out.push_back(r);
    }
    return out;
}

state::Ensemble state_for(const state::MeasurementRecord& rec, const state::Scenario& s) {
    return state::update_channel(rec, s).apply(s.initial());
}

std::vector<geometry::SpacetimePoint> centers(const std::vector<Insertion>& ins) {
    std::vector<geometry::SpacetimePoint> out;
    for (const auto& i : ins) out.push_back(i.op.support.center());
    return out;
}

}  // namespace

cplx smeared_wightman(const state::Ensemble& rho, const std::vector<Insertion>& ins, const lattice::LatticeField& f) {
    const auto blocks = blocks_of(ins, f);
    state::Ensemble e = rho;
    e.normalize();
    cplx sum = 0.0;
    for (const auto& v : e.branches) sum += matrix_element(v, v, ins, blocks, f);
    return sum;
}

CorrelationResult n_point_pgm(const std::vector<Insertion>& ins, const state::Scenario& s, const std::string& label,
                              const geometry::PrescriptionOptions& opt) {
    const auto& m = s.detector(label).region;
    CorrelationResult r;
    r.prescription = "pgm";
    r.relations = relations_to(ins, m);

    const state::RecordEntry* e = s.record.find(label);
    const Mode mode = e ? e->mode : Mode::Unknown;
    state::MeasurementRecord inside_rec, outside_rec;
    if (mode == Mode::Selective) inside_rec.entries.push_back(*e);
    else if (mode != Mode::NotPerformed) inside_rec.entries.push_back({label, Mode::NonSelective, 0});
    if (mode == Mode::NonSelective) outside_rec.entries.push_back({label, Mode::NonSelective, 0});
    const std::string inside_name = mode == Mode::Selective ? "selective:" + label
                                    : mode == Mode::NotPerformed ? "vacuum"
                                                                 : "nonselective:" + label;
    const std::string outside_name = mode == Mode::NonSelective ? "nonselective:" + label : "vacuum";

    std::size_t in = 0;
    for (Relation rel : r.relations) in += rel == Relation::InPPlus;
    if (in > 0) {
        r.status = in == ins.size() ? geometry::PrescriptionStatus::P1Inside : geometry::PrescriptionStatus::P2;
        r.state = inside_name;
        r.value = smeared_wightman(state_for(inside_rec, s), ins, *s.field);
        return r;
    }
    r.status = geometry::prescription_status(centers(ins), m, opt).status;
    r.state = outside_name;
    r.value = smeared_wightman(state_for(outside_rec, s), ins, *s.field);
    if (*r.status != geometry::PrescriptionStatus::P1Outside) {
        r.conflict = true;
        r.alternative = smeared_wightman(state_for(inside_rec, s), ins, *s.field);
    }
    return r;
}

const char* to_string(AlgebraicMode m) {
    return m == AlgebraicMode::Selective ? "algebraic-selective" : "algebraic-nonselective";
}

CorrelationResult n_point_algebraic(const std::vector<Insertion>& ins, const state::Scenario& s, AlgebraicMode mode) {
    CorrelationResult r;
    r.prescription = to_string(mode);
    std::vector<state::RecordEntry> included;
    for (const auto& d : s.detectors) {
        const state::RecordEntry* e = s.record.find(d.spec.label);
        if (!e || e->mode == Mode::NotPerformed) continue;
        const auto rel = relations_to(ins, d.region);
        if (r.relations.empty()) r.relations = rel;
        std::size_t past = 0;
        for (Relation x : rel) past += x == Relation::InPMinus;
        if (past == rel.size()) continue;
        if (past > 0)
            throw StateError(StateErrc::StripRegion, "insertions straddle the past of " + d.spec.label);
        if (mode == AlgebraicMode::Selective && e->mode == Mode::Unknown)
            throw StateError(StateErrc::UnknownOutcome, d.spec.label + ": outcome unknown in selective mode");
        included.push_back(*e);
        if (mode == AlgebraicMode::NonSelectiveAverage)
            for (std::size_t i = 0; i < ins.size(); ++i)
                for (std::size_t j = i + 1; j < ins.size(); ++j) {
                    if (rel[i] != Relation::Spacelike || rel[j] != Relation::Spacelike) continue;
                    const auto ci = ins[i].op.support.center(), cj = ins[j].op.support.center();
                    if (ci.t == cj.t && ci.x == cj.x) continue;
                    try {
                        geometry::causally_convex_bridge(ci, cj, d.region);
                    } catch (const GeometryError& err) {
                        if (err.code() == GeometryErrc::NoBridge) r.no_bridge = true;
                        else throw;
                    }
                }
    }
    const auto blocks = blocks_of(ins, *s.field);
    const Vec vac = s.field->vacuum();
    if (mode == AlgebraicMode::Selective) {
        state::MeasurementRecord rec{included};
        r.state = "algebraic-global";
        r.value = smeared_wightman(state_for(rec, s), ins, *s.field);
        return r;
    }
    // Σ_m p_m ω^(m)(L) as an explicit sum over outcome tuples.
    r.state = "outcome-average";
    std::vector<int> outcome(included.size(), 0);
    cplx sum = 0.0;
    while (true) {
        state::MeasurementRecord rec;
        for (std::size_t i = 0; i < included.size(); ++i) rec.entries.push_back({included[i].label, Mode::Selective, outcome[i]});
        Vec u = vac;
        const state::Channel ch = state::update_channel(rec, s);
        for (const auto& st : ch.steps()) u = state::apply_kraus(*s.field, st.kraus, st.outcome, u);
        if (u.squaredNorm() > 0.0) sum += matrix_element(u, u, ins, blocks, *s.field);
        std::size_t k = 0;
        while (k < outcome.size()) {
            const int n = static_cast<int>(s.detector(included[k].label).kraus.ops.size());
            if (++outcome[k] < n) break;
            outcome[k++] = 0;
        }
        if (k == outcome.size()) break;
    }
    r.value = sum;
    return r;
}

double no_signalling_check(const std::vector<state::Generator>& word, const state::Scenario& s,
                           const std::string& label) {
    const auto& d = s.detector(label);
    std::vector<Insertion> ins;
    for (const auto& g : word) {
        if (geometry::classify(g.support, d.region) != Relation::Spacelike)
            throw StateError(StateErrc::StripRegion, g.name + " is not supported in S_" + label);
        ins.push_back(Insertion{g.support.center(), g});
    }
    const auto blocks = blocks_of(ins, *s.field);
    const Vec vac = s.field->vacuum();
    const cplx bare = matrix_element(vac, vac, ins, blocks, *s.field);
    cplx avg = 0.0;
    for (int m = 0; m < static_cast<int>(d.kraus.ops.size()); ++m) {
        const Vec u = state::apply_kraus(*s.field, d.kraus, m, vac);
        avg += matrix_element(u, u, ins, blocks, *s.field);
    }
    return std::abs(avg - bare);
}

}  // namespace udw::correlation
