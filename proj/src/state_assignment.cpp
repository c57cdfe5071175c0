#include "udw/state_assignment.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace udw::state {

using geometry::BoxRegion;
using geometry::Relation;

double Ensemble::trace() const {
    double t = 0.0;
    for (const auto& v : branches) t += v.squaredNorm();
    return t;
}

void Ensemble::normalize() {
    const double t = trace();
    if (!(t > 0.0)) throw StateError(StateErrc::ZeroProbability, label + ": ensemble has zero weight");
    const double s = 1.0 / std::sqrt(t);
    for (auto& v : branches) v *= s;
}

Mat Ensemble::gram() const {
    const auto n = static_cast<Eigen::Index>(branches.size());
    Mat g(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) g(a, b) = branches[a].dot(branches[b]);
    return g;
}

quantum::StateResiduals Ensemble::residuals() const {
    quantum::StateResiduals r = quantum::residuals_of(gram());
    if (!branches.empty() && static_cast<Eigen::Index>(branches.size()) < branches.front().size())
        r.min_eigenvalue = std::min(r.min_eigenvalue, 0.0);
    return r;
}

Mat Ensemble::density() const {
    if (branches.empty()) throw StateError(StateErrc::ZeroProbability, label + ": empty ensemble");
    const Eigen::Index n = branches.front().size();
    Mat rho = Mat::Zero(n, n);
    for (const auto& v : branches) rho += v * v.adjoint();
    return rho / trace();
}

const char* to_string(Mode m) {
    switch (m) {
        case Mode::Selective: return "selective";
        case Mode::NonSelective: return "nonselective";
        case Mode::NotPerformed: return "not_performed";
        case Mode::Unknown: return "unknown";
    }
    return "?";
}

const char* to_string(Semantics s) { return s == Semantics::PGMClasses ? "pgm" : "algebraic"; }

const RecordEntry* MeasurementRecord::find(const std::string& label) const {
    for (const auto& e : entries)
        if (e.label == label) return &e;
    return nullptr;
}

const detector::DetectorRun& Scenario::detector(const std::string& label) const {
    for (const auto& d : detectors)
        if (d.spec.label == label) return d;
    throw StateError(StateErrc::InvalidRecord, "no detector labelled " + label);
}

std::vector<geometry::MeasurementRegion> Scenario::regions() const {
    std::vector<geometry::MeasurementRegion> out;
    for (const auto& d : detectors) out.push_back(d.region);
    return out;
}

std::vector<std::string> Scenario::labels() const {
    std::vector<std::string> out;
    for (const auto& d : detectors) out.push_back(d.spec.label);
    return out;
}

Ensemble Scenario::initial() const { return Ensemble{"vacuum", {field->vacuum()}}; }

Vec apply_kraus(const lattice::LatticeField& f, const detector::KrausSet& k, int outcome, const Vec& v) {
    if (outcome < 0 || outcome >= static_cast<int>(k.ops.size()))
        throw StateError(StateErrc::InvalidRecord, "outcome index out of range");
    return f.apply_at(v, k.slot, k.first_site, k.count, k.ops[outcome]);
}

Ensemble Channel::apply(const Ensemble& rho) const {
    Ensemble out = rho;
    for (const auto& st : steps_) {
        std::vector<Vec> next;
        if (st.mode == Mode::Selective) {
            for (const auto& v : out.branches) next.push_back(apply_kraus(*field_, st.kraus, st.outcome, v));
        } else {
            for (const auto& v : out.branches)
                for (int i = 0; i < static_cast<int>(st.kraus.ops.size()); ++i)
                    next.push_back(apply_kraus(*field_, st.kraus, i, v));
        }
        out.branches = std::move(next);
        if (!(out.trace() > 1e-300)) {
            std::ostringstream os;
            os << st.label << ": outcome " << st.outcome << " has zero probability";
            throw StateError(StateErrc::ZeroProbability, os.str());
        }
    }
    out.normalize();
    return out;
}

Channel update_channel(const MeasurementRecord& record, const Scenario& s) {
    std::set<std::string> seen;
    std::vector<Channel::Step> steps;
    std::vector<geometry::MeasurementRegion> regions;
    for (const auto& e : record.entries) {
        if (!seen.insert(e.label).second) throw StateError(StateErrc::InvalidRecord, "duplicate record entry " + e.label);
        const auto& d = s.detector(e.label);
        if (e.mode != Mode::Selective && e.mode != Mode::NonSelective) continue;
        if (e.mode == Mode::Selective && (e.outcome < 0 || e.outcome >= static_cast<int>(d.kraus.ops.size())))
            throw StateError(StateErrc::InvalidRecord, e.label + ": outcome out of range");
        steps.push_back({e.label, e.mode, e.outcome, d.kraus});
        regions.push_back(d.region);
    }
    std::vector<std::size_t> order;
    try {
        order = geometry::causal_order(regions);
    } catch (const geometry::GeometryError& err) {
        throw StateError(StateErrc::Incomparable, err.what());
    }
    std::vector<Channel::Step> ordered;
    for (std::size_t i : order) ordered.push_back(steps[i]);
    return Channel(s.field, std::move(ordered));
}

std::vector<Generator> generator_library(const lattice::LatticeField& f, const GeneratorOptions& opt) {
    const double a = f.params().spacing;
    std::vector<Generator> out;
    for (int k = opt.slot_min; k <= opt.slot_max; ++k)
        for (int scale : opt.scales)
            for (int j = 0; j + scale <= f.sites(); ++j) {
                Generator g;
                g.slot = k;
                g.first_site = j;
                g.weights.assign(scale, 1.0 / scale);
                std::ostringstream name;
                name << "phi[k=" << k << ",j=" << j;
                if (scale > 1) name << ".." << j + scale - 1;
                name << "]";
                g.name = name.str();
                g.support = BoxRegion::make({f.slot_time(k) - opt.half_duration * a, {f.site_position(j) - opt.half_width * a}},
                                            {f.slot_time(k) + opt.half_duration * a,
                                             {f.site_position(j + scale - 1) + opt.half_width * a}});
                out.push_back(std::move(g));
            }
    return out;
}

namespace {

bool definite(Relation r) { return r == Relation::Spacelike || r == Relation::InPPlus || r == Relation::InPMinus; }

struct Term {
    std::vector<std::size_t> detectors;
    Relation rel;
};

std::vector<std::size_t> split_labels(const std::string& s, const std::vector<std::string>& labels) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t best = labels.size(), len = 0;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i].size() > len && s.compare(pos, labels[i].size(), labels[i]) == 0) {
                best = i;
                len = labels[i].size();
            }
        if (best == labels.size()) return {};
        out.push_back(best);
        pos += len;
    }
    return out;
}

Term parse_term(const std::string& t, const std::vector<std::string>& labels, const std::string& whole) {
    Term term;
    std::string rest;
    if (t.rfind("S_", 0) == 0) {
        term.rel = Relation::Spacelike;
        rest = t.substr(2);
    } else if (t.rfind("P+_", 0) == 0) {
        term.rel = Relation::InPPlus;
        rest = t.substr(3);
    } else if (t.rfind("P-_", 0) == 0) {
        term.rel = Relation::InPMinus;
        rest = t.substr(3);
    } else {
        throw StateError(StateErrc::InvalidRegion, "cannot parse region term '" + t + "' in " + whole);
    }
    term.detectors = split_labels(rest, labels);
    if (term.detectors.empty() || (term.rel != Relation::Spacelike && term.detectors.size() != 1))
        throw StateError(StateErrc::InvalidRegion, "unknown detector label in region term '" + t + "' of " + whole);
    return term;
}

std::vector<Term> parse_terms(const std::string& s, const std::vector<std::string>& labels, const std::string& whole) {
    std::vector<Term> out;
    std::string cur;
    const std::string cap = "∩";
    for (std::size_t i = 0; i < s.size();) {
        if (s.compare(i, cap.size(), cap) == 0 || s[i] == '&') {
            out.push_back(parse_term(cur, labels, whole));
            cur.clear();
            i += s[i] == '&' ? 1 : cap.size();
        } else {
            cur += s[i++];
        }
    }
    out.push_back(parse_term(cur, labels, whole));
    return out;
}

bool satisfies(const Term& t, const std::vector<Relation>& rel) {
    for (std::size_t d : t.detectors)
        if (rel[d] != t.rel) return false;
    return true;
}

}  // namespace

Region named_region(const std::string& name, const Scenario& s) {
    const auto labels = s.labels();
    const std::size_t cut = name.find('\\');
    const std::vector<Term> include = parse_terms(name.substr(0, cut), labels, name);
    const std::vector<Term> exclude =
        cut == std::string::npos ? std::vector<Term>{} : parse_terms(name.substr(cut + 1), labels, name);
    const auto regions = s.regions();
    return Region{name, [include, exclude, regions](const BoxRegion& b) {
                      std::vector<Relation> rel;
                      for (const auto& m : regions) {
                          rel.push_back(geometry::classify(b, m));
                          if (!definite(rel.back())) return false;
                      }
                      for (const auto& t : include)
                          if (!satisfies(t, rel)) return false;
                      for (const auto& t : exclude)
                          if (satisfies(t, rel)) return false;
                      return true;
                  }};
}

Region region_of_set(const std::string& name, const geometry::RegionSet& r) {
    return Region{name, [r](const BoxRegion& b) {
                      const auto verts = b.vertices();
                      for (const auto& box : r.boxes)
                          if (box.contains(b.lo) && box.contains(b.hi)) return true;
                      for (const auto& d : r.diamonds)
                          if (std::all_of(verts.begin(), verts.end(), [&](const auto& v) { return d.contains(v); }))
                              return true;
                      return false;
                  }};
}

std::vector<Generator> generators_in(const Region& r, const std::vector<Generator>& library) {
    std::vector<Generator> out;
    for (const auto& g : library)
        if (r.contains(g.support)) out.push_back(g);
    return out;
}

namespace {

// Moments Σ_a ⟨Φ_u v_a, Φ_w v_a⟩ over all word pairs with |u| + |w| ≤ degree.
std::vector<cplx> moments(const Ensemble& rho, const std::vector<Generator>& gens, const std::vector<Mat>& blocks,
                          const lattice::LatticeField& f, int degree) {
    Ensemble e = rho;
    e.normalize();
    const int half = (degree + 1) / 2;
    // words[k] lists (word length, vectors per branch).
    std::vector<int> length{0};
    std::vector<std::vector<Vec>> vecs{e.branches};
    std::size_t begin = 0;
    for (int len = 1; len <= half; ++len) {
        const std::size_t end = vecs.size();
        for (std::size_t w = begin; w < end; ++w)
            for (std::size_t g = 0; g < gens.size(); ++g) {
                std::vector<Vec> next;
                for (const auto& v : vecs[w])
                    next.push_back(f.apply_at(v, gens[g].slot, gens[g].first_site,
                                              static_cast<int>(gens[g].weights.size()), blocks[g]));
                vecs.push_back(std::move(next));
                length.push_back(len);
            }
        begin = end;
    }
    std::vector<cplx> out;
    for (std::size_t u = 0; u < vecs.size(); ++u)
        for (std::size_t w = u; w < vecs.size(); ++w) {
            if (length[u] + length[w] > degree) continue;
            cplx m = 0.0;
            for (std::size_t a = 0; a < e.branches.size(); ++a) m += vecs[u][a].dot(vecs[w][a]);
            out.push_back(m);
        }
    return out;
}

}  // namespace

double max_deviation(const Ensemble& a, const Ensemble& b, const std::vector<Generator>& gens,
                     const lattice::LatticeField& f, int degree) {
    if (gens.empty()) throw StateError(StateErrc::EmptyGenerators, "no generator fits inside the region");
    std::vector<Mat> blocks;
    for (const auto& g : gens) blocks.push_back(f.smeared_block(g.weights));
    const auto ma = moments(a, gens, blocks, f, degree);
    const auto mb = moments(b, gens, blocks, f, degree);
    double worst = 0.0;
    for (std::size_t i = 0; i < ma.size(); ++i) worst = std::max(worst, std::abs(ma[i] - mb[i]));
    return worst;
}

bool equivalent_on_region(const Ensemble& a, const Ensemble& b, const std::vector<Generator>& gens,
                          const lattice::LatticeField& f, double tol, int degree) {
    return max_deviation(a, b, gens, f, degree) <= tol;
}

RegionStateClass assign_state(const Region& r, const Scenario& s, Semantics sem, const GeneratorOptions& opt) {
    RegionStateClass out;
    out.region = r.name;
    out.generators = generators_in(r, generator_library(*s.field, opt));
    if (out.generators.empty())
        throw StateError(StateErrc::EmptyGenerators, r.name + ": no generator fits inside the region");
    for (const auto& d : s.detectors) {
        const Relation first = geometry::classify(out.generators.front().support, d.region);
        for (const auto& g : out.generators)
            if (geometry::classify(g.support, d.region) != first || !definite(first))
                throw StateError(StateErrc::StripRegion,
                                 r.name + ": no single causal relation to measurement " + d.spec.label);
        out.relations.push_back(first);
    }
    MeasurementRecord applied;
    for (const auto& e : s.record.entries) {
        const auto labels = s.labels();
        const auto idx = static_cast<std::size_t>(std::find(labels.begin(), labels.end(), e.label) - labels.begin());
        if (idx == labels.size()) throw StateError(StateErrc::InvalidRecord, "no detector labelled " + e.label);
        const Relation rel = out.relations[idx];
        if (rel == Relation::InPMinus || e.mode == Mode::NotPerformed) continue;
        if (sem == Semantics::PGMClasses) {
            if (rel == Relation::InPPlus && e.mode != Mode::Unknown) applied.entries.push_back(e);
        } else {
            if (e.mode == Mode::Unknown)
                throw StateError(StateErrc::UnknownOutcome, e.label + ": outcome unknown under algebraic semantics");
            applied.entries.push_back(e);
        }
    }
    out.representative = update_channel(applied, s).apply(s.initial());
    out.representative.label = r.name;
    return out;
}

std::vector<Ensemble> states_one_to_nine(const Scenario& s, const std::string& a_label, const std::string& b_label,
                                         int a, int b) {
    const auto order = geometry::measurement_partial_order(s.detector(a_label).region, s.detector(b_label).region);
    if (order != geometry::Order::Both)
        throw StateError(StateErrc::InvalidRecord, "detectors " + a_label + " and " + b_label + " are not spacelike");
    const RecordEntry an{a_label, Mode::NonSelective, 0}, bn{b_label, Mode::NonSelective, 0};
    const RecordEntry as{a_label, Mode::Selective, a}, bs{b_label, Mode::Selective, b};
    const std::vector<MeasurementRecord> records{
        {}, {{an}}, {{bn}}, {{an, bn}}, {{as}}, {{as, bn}}, {{bs}}, {{bs, an}}, {{as, bs}},
    };
    std::vector<Ensemble> out;
    const Ensemble vac = s.initial();
    for (std::size_t i = 0; i < records.size(); ++i) {
        Ensemble e = update_channel(records[i], s).apply(vac);
        e.label = "rho" + std::to_string(i + 1);
        out.push_back(std::move(e));
    }
    return out;
}

Ensemble knowledge_state(const geometry::SpacetimePoint& observer, const MeasurementRecord& known, const Scenario& s) {
    MeasurementRecord applied;
    for (const auto& d : s.detectors) {
        const RecordEntry* e = known.find(d.spec.label);
        const Mode mode = e ? e->mode : Mode::Unknown;
        const Relation rel = geometry::classify(observer, d.region);
        if (!definite(rel))
            throw geometry::GeometryError(geometry::GeometryErrc::StripPoint,
                                          "observer lies in " + std::string(geometry::to_string(rel)) + " of " +
                                              d.spec.label);
        if (mode == Mode::Selective && rel != Relation::InPPlus)
            throw StateError(StateErrc::CausalityViolation,
                             "outcome of " + d.spec.label + " cannot be known outside its future region of knowledge");
        if (rel != Relation::InPPlus || mode == Mode::NotPerformed) continue;
        applied.entries.push_back({d.spec.label, mode == Mode::Selective ? Mode::Selective : Mode::NonSelective,
                                   e ? e->outcome : 0});
    }
    for (const auto& e : known.entries) s.detector(e.label);
    Ensemble out = update_channel(applied, s).apply(s.initial());
    out.label = "knowledge";
    return out;
}

}  // namespace udw::state
