#include "inertia/json_io.hpp"

#include <stdexcept>

#include "inertia/parse.hpp"

namespace inertia {

namespace {

std::string int_str(const Int& v) { return v.str(); }
std::string rat_str(const Rat& r) {
    return den(r) == 1 ? num(r).str() : num(r).str() + "/" + den(r).str();
}
Int int_of(const Json& j) { return Int(j.get<std::string>()); }
Rat rat_of(const Json& j) { return parse_rat(j.get<std::string>()); }

Json prime_set_to_json(const PrimeSet& pi) {
    if (pi.is_all()) return Json("all");
    Json out = Json::array();
    for (const auto& p : pi.primes()) out.push_back(int_str(p));
    return out;
}

PrimeSet prime_set_from_json(const Json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() != "all")
            throw std::invalid_argument("prime set: expected \"all\" or an array");
        return PrimeSet::all();
    }
    std::set<Int> primes;
    for (const auto& p : j) primes.insert(int_of(p));
    return PrimeSet(std::move(primes));
}

Json mult_to_json(const Multiplicity& m) {
    return m.omega ? Json("w") : Json(std::to_string(m.count));
}

Multiplicity mult_from_json(const Json& j) {
    std::string s = j.get<std::string>();
    if (s == "w") return Multiplicity::w();
    return Multiplicity::finite(std::stol(s));
}

Json scalar_map_to_json(const std::map<std::size_t, Rat>& m) {
    Json out = Json::array();
    for (const auto& [s, r] : m) out.push_back({{"slot", s}, {"value", rat_str(r)}});
    return out;
}

std::map<std::size_t, Rat> scalar_map_from_json(const Json& j) {
    std::map<std::size_t, Rat> out;
    for (const auto& item : j) out[item.at("slot").get<std::size_t>()] = rat_of(item.at("value"));
    return out;
}

std::vector<std::size_t> size_vec_from_json(const Json& j) {
    std::vector<std::size_t> out;
    for (const auto& v : j) out.push_back(v.get<std::size_t>());
    return out;
}

}  // namespace

Json group_to_json(const GroupDescriptor& g) {
    Json out;
    out["slots"] = Json::array();
    for (const auto& sl : g.slots) {
        Json s;
        switch (sl.atom.kind) {
            case AtomKind::Cyclic:
                s["kind"] = "cyclic";
                s["p"] = int_str(sl.atom.p);
                s["e"] = sl.atom.e;
                break;
            case AtomKind::Prufer:
                s["kind"] = "prufer";
                s["p"] = int_str(sl.atom.p);
                break;
            case AtomKind::Localized:
                s["kind"] = "localized";
                s["pi"] = prime_set_to_json(sl.atom.pi);
                break;
        }
        s["mult"] = mult_to_json(sl.mult);
        out["slots"].push_back(std::move(s));
    }
    if (g.fg) {
        Json rel = Json::array();
        const Mat& m = g.fg->relations;
        for (std::size_t i = 0; i < m.rows; ++i) {
            Json row = Json::array();
            for (std::size_t j = 0; j < m.cols; ++j) row.push_back(int_str(m(i, j)));
            rel.push_back(std::move(row));
        }
        out["fg"] = std::move(rel);
    }
    return out;
}

GroupDescriptor group_from_json(const Json& j) {
    if (j.contains("fg")) {
        const Json& rel = j.at("fg");
        std::size_t rows = rel.size();
        std::size_t cols = rows ? rel.at(0).size() : 0;
        Mat m(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t k = 0; k < cols; ++k) m(i, k) = int_of(rel.at(i).at(k));
        return GroupDescriptor::from_presentation(m);
    }
    std::vector<Slot> slots;
    for (const auto& s : j.at("slots")) {
        std::string kind = s.at("kind").get<std::string>();
        Atom a;
        if (kind == "cyclic")
            a = Atom::cyclic(int_of(s.at("p")), s.at("e").get<long>());
        else if (kind == "prufer")
            a = Atom::prufer(int_of(s.at("p")));
        else if (kind == "localized")
            a = Atom::localized(prime_set_from_json(s.at("pi")));
        else
            throw std::invalid_argument("unknown atom kind: " + kind);
        slots.push_back({std::move(a), mult_from_json(s.at("mult"))});
    }
    return GroupDescriptor::from_slots(std::move(slots));
}

Json element_to_json(const Element& e) {
    Json out = Json::array();
    for (const auto& [k, v] : e.coords)
        out.push_back({{"slot", k.slot}, {"copy", k.copy}, {"value", rat_str(v)}});
    return out;
}

Element element_from_json(const Json& j, const GroupDescriptor& g) {
    Element e;
    for (const auto& c : j)
        e.coords[{c.at("slot").get<std::size_t>(), c.at("copy").get<long>()}] =
            rat_of(c.at("value"));
    return canonicalize(g, std::move(e));
}

Json handle_to_json(const SubgroupHandle& h) {
    Json out;
    out["label"] = h.label;
    out["generators"] = Json::array();
    for (const auto& gen : h.generators) out["generators"].push_back(element_to_json(gen));
    out["divisibleClosure"] = Json::array();
    for (const auto& [slot, pi] : h.divisibleClosure)
        out["divisibleClosure"].push_back({{"slot", slot}, {"pi", prime_set_to_json(pi)}});
    return out;
}

SubgroupHandle handle_from_json(const Json& j, const GroupDescriptor& g) {
    SubgroupHandle h;
    h.label = j.at("label").get<std::string>();
    for (const auto& gen : j.at("generators")) h.generators.push_back(element_from_json(gen, g));
    for (const auto& dc : j.at("divisibleClosure"))
        h.divisibleClosure[dc.at("slot").get<std::size_t>()] = prime_set_from_json(dc.at("pi"));
    return h;
}

Json endo_to_json(const Endomorphism& phi) {
    Json out;
    out["blocks"] = Json::array();
    for (const auto& b : phi.blocks) {
        Json jb;
        jb["slots"] = Json::array();
        for (auto s : b.slots) jb["slots"].push_back(s);
        jb["scalar"] = rat_str(b.scalar.value);
        if (b.scalar.local_p) jb["localP"] = int_str(*b.scalar.local_p);
        out["blocks"].push_back(std::move(jb));
    }
    out["matrix"] = Json::array();
    for (const auto& [key, v] : phi.matrix.entries)
        out["matrix"].push_back({{"src", {{"slot", key.first.slot}, {"copy", key.first.copy}}},
                                 {"dst", {{"slot", key.second.slot}, {"copy", key.second.copy}}},
                                 {"value", rat_str(v)}});
    out["finitary"] = Json::array();
    for (const auto& c : phi.finitary.contributions) {
        Json jc;
        jc["modulus"] = int_str(c.modulus);
        jc["weights"] = Json::array();
        for (const auto& [k, w] : c.weights)
            jc["weights"].push_back({{"slot", k.slot}, {"copy", k.copy}, {"value", rat_str(w)}});
        jc["target"] = element_to_json(c.target);
        out["finitary"].push_back(std::move(jc));
    }
    return out;
}

Endomorphism endo_from_json(const Json& j, const GroupDescriptor& g) {
    Endomorphism phi = zero_endo(g);
    for (const auto& b : j.at("blocks")) {
        ScalarBlock sb;
        for (const auto& s : b.at("slots")) sb.slots.insert(s.get<std::size_t>());
        sb.scalar = Scalar(rat_of(b.at("scalar")));
        if (b.contains("localP")) sb.scalar.local_p = int_of(b.at("localP"));
        phi.blocks.push_back(std::move(sb));
    }
    for (const auto& m : j.at("matrix")) {
        CoordKey src{m.at("src").at("slot").get<std::size_t>(), m.at("src").at("copy").get<long>()};
        CoordKey dst{m.at("dst").at("slot").get<std::size_t>(), m.at("dst").at("copy").get<long>()};
        phi.matrix.entries[{src, dst}] = rat_of(m.at("value"));
    }
    for (const auto& c : j.at("finitary")) {
        FinitaryContribution fc;
        fc.modulus = int_of(c.at("modulus"));
        for (const auto& w : c.at("weights"))
            fc.weights[{w.at("slot").get<std::size_t>(), w.at("copy").get<long>()}] =
                rat_of(w.at("value"));
        fc.target = element_from_json(c.at("target"), g);
        phi.finitary.contributions.push_back(std::move(fc));
    }
    WellDefined wd = is_well_defined(phi);
    if (!wd) throw std::invalid_argument("endomorphism ill-defined: " + wd.diagnostic);
    return phi;
}

Json certificate_to_json(const InertialCertificate& c) {
    Json out;
    out["kind"] = c.kind == InertialCertificate::Kind::CaseA ? "CaseA" : "CaseB";
    out["indexBound"] = int_str(c.index_bound);
    out["a0"] = c.a0_description;
    if (c.kind == InertialCertificate::Kind::CaseA) {
        out["m"] = Json::array();
        for (const auto& m : c.m) out["m"].push_back(int_str(m));
        return out;
    }
    out["pi"] = prime_set_to_json(c.pi);
    out["pi1"] = prime_set_to_json(c.pi1);
    out["bSlots"] = c.b_slots;
    out["dSlots"] = c.d_slots;
    out["cSlots"] = c.c_slots;
    out["v"] = handle_to_json(c.v);
    out["rankV"] = c.rank_v;
    out["scalars"] = Json::array();
    for (const auto& es : c.scalars)
        out["scalars"].push_back({{"mn", rat_str(es.mn)},
                                  {"onV", rat_str(es.on_v)},
                                  {"onB", scalar_map_to_json(es.on_b)},
                                  {"onD", scalar_map_to_json(es.on_d)},
                                  {"onC", scalar_map_to_json(es.on_c)}});
    return out;
}

InertialCertificate certificate_from_json(const Json& j, const GroupDescriptor& g) {
    InertialCertificate c;
    std::string kind = j.at("kind").get<std::string>();
    c.index_bound = int_of(j.at("indexBound"));
    c.a0_description = j.at("a0").get<std::string>();
    if (kind == "CaseA") {
        c.kind = InertialCertificate::Kind::CaseA;
        for (const auto& m : j.at("m")) c.m.push_back(int_of(m));
        return c;
    }
    if (kind != "CaseB") throw std::invalid_argument("unknown certificate kind: " + kind);
    c.kind = InertialCertificate::Kind::CaseB;
    c.pi = prime_set_from_json(j.at("pi"));
    c.pi1 = prime_set_from_json(j.at("pi1"));
    c.b_slots = size_vec_from_json(j.at("bSlots"));
    c.d_slots = size_vec_from_json(j.at("dSlots"));
    c.c_slots = size_vec_from_json(j.at("cSlots"));
    c.v = handle_from_json(j.at("v"), g);
    c.rank_v = j.at("rankV").get<long>();
    for (const auto& es : j.at("scalars")) {
        InertialCertificate::EndoScalars s;
        s.mn = rat_of(es.at("mn"));
        s.on_v = rat_of(es.at("onV"));
        s.on_b = scalar_map_from_json(es.at("onB"));
        s.on_d = scalar_map_from_json(es.at("onD"));
        s.on_c = scalar_map_from_json(es.at("onC"));
        c.scalars.push_back(std::move(s));
    }
    return c;
}

Json witness_to_json(const NonInertialWitness& w) {
    Json out;
    switch (w.kind) {
        case WitnessKind::Diagonal: out["kind"] = "Diagonal"; break;
        case WitnessKind::FreeRank: out["kind"] = "FreeRank"; break;
        case WitnessKind::Independence: out["kind"] = "Independence"; break;
        case WitnessKind::PrimaryLin: out["kind"] = "PrimaryLin"; break;
    }
    out["mode"] = w.mode == WitnessMode::RIN ? "RIN" : "LIN";
    out["ambient"] = group_to_json(w.ambient);
    out["verifiedTo"] = w.verified_to;
    out["growth"] = w.growth_expr();
    out["p"] = int_str(w.p);
    out["alpha"] = rat_str(w.alpha.value);
    if (w.alpha.local_p) out["alphaLocalP"] = int_str(*w.alpha.local_p);
    out["mn"] = rat_str(w.mn);
    out["pruferSlot"] = w.prufer_slot;
    out["localSlot"] = w.local_slot;
    out["slot"] = w.slot;
    out["generator"] = element_to_json(w.generator);
    out["linSlots"] = Json::array();
    for (const auto& ls : w.lin_slots)
        out["linSlots"].push_back({{"slot", ls.slot},
                                   {"startCopy", ls.start_copy},
                                   {"orderFactor", int_str(ls.order_factor)}});
    out["chain"] = Json::array();
    for (const auto& t : w.chain)
        out["chain"].push_back({{"slot", t.slot},
                                {"copyBase", t.copy_base},
                                {"copyStep", t.copy_step},
                                {"divide", t.divide},
                                {"fixedExp", t.fixed_exp}});
    out["chainStart"] = w.chain_start;
    out["chainFactor"] = int_str(w.chain_factor);
    return out;
}

NonInertialWitness witness_from_json(const Json& j) {
    NonInertialWitness w;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "Diagonal")
        w.kind = WitnessKind::Diagonal;
    else if (kind == "FreeRank")
        w.kind = WitnessKind::FreeRank;
    else if (kind == "Independence")
        w.kind = WitnessKind::Independence;
    else if (kind == "PrimaryLin")
        w.kind = WitnessKind::PrimaryLin;
    else
        throw std::invalid_argument("unknown witness kind: " + kind);
    w.mode = j.at("mode").get<std::string>() == "LIN" ? WitnessMode::LIN : WitnessMode::RIN;
    w.ambient = group_from_json(j.at("ambient"));
    w.verified_to = j.at("verifiedTo").get<long>();
    w.p = int_of(j.at("p"));
    w.alpha = Scalar(rat_of(j.at("alpha")));
    if (j.contains("alphaLocalP")) w.alpha.local_p = int_of(j.at("alphaLocalP"));
    w.mn = rat_of(j.at("mn"));
    w.prufer_slot = j.at("pruferSlot").get<std::size_t>();
    w.local_slot = j.at("localSlot").get<std::size_t>();
    w.slot = j.at("slot").get<std::size_t>();
    w.generator = element_from_json(j.at("generator"), w.ambient);
    for (const auto& ls : j.at("linSlots"))
        w.lin_slots.push_back({ls.at("slot").get<std::size_t>(), ls.at("startCopy").get<long>(),
                               int_of(ls.at("orderFactor"))});
    for (const auto& t : j.at("chain"))
        w.chain.push_back({t.at("slot").get<std::size_t>(), t.at("copyBase").get<long>(),
                           t.at("copyStep").get<long>(), t.at("divide").get<bool>(),
                           t.at("fixedExp").get<long>()});
    w.chain_start = j.at("chainStart").get<long>();
    w.chain_factor = int_of(j.at("chainFactor"));
    return w;
}

Json classification_document(const GroupDescriptor& g, const std::vector<Endomorphism>& phis,
                             const Verdict& v, std::size_t witness_endo) {
    Json doc;
    doc["schemaVersion"] = kSchemaVersion;
    doc["kind"] = "classification";
    doc["group"] = group_to_json(g);
    doc["endos"] = Json::array();
    for (const auto& phi : phis) doc["endos"].push_back(endo_to_json(phi));
    doc["verdict"] = {{"rin", v.rin}, {"lin", v.lin}};
    if (v.certificate) doc["certificate"] = certificate_to_json(*v.certificate);
    if (v.witness) {
        doc["witness"] = witness_to_json(*v.witness);
        doc["witnessEndo"] = witness_endo;
    }
    return doc;
}

std::string verify_document(const Json& doc, long precision) {
    try {
        if (!doc.contains("schemaVersion") || doc.at("schemaVersion").get<int>() != kSchemaVersion)
            return "unsupported or missing schemaVersion";
        if (doc.at("kind").get<std::string>() != "classification")
            return "unsupported document kind";
        GroupDescriptor g = group_from_json(doc.at("group"));
        std::vector<Endomorphism> phis;
        for (const auto& e : doc.at("endos")) phis.push_back(endo_from_json(e, g));
        if (phis.empty()) return "document lists no endomorphisms";
        bool rin = doc.at("verdict").at("rin").get<bool>();
        if (rin) {
            if (!doc.contains("certificate")) return "rin verdict without a certificate";
            InertialCertificate cert = certificate_from_json(doc.at("certificate"), g);
            return validate_certificate(cert, phis, g);
        }
        if (!doc.contains("witness")) return "non-inertial verdict without a witness";
        NonInertialWitness w = witness_from_json(doc.at("witness"));
        if (!(w.ambient == g)) return "witness ambient differs from the document group";
        std::size_t idx = doc.value("witnessEndo", std::size_t{0});
        if (idx >= phis.size()) return "witnessEndo out of range";
        WitnessCheck c = verify_witness(w, phis[idx], precision);
        if (!c.ok)
            return "witness growth fails at index " + std::to_string(c.first_bad);
        return "";
    } catch (const std::exception& e) {
        return std::string("document rejected: ") + e.what();
    }
}

}  // namespace inertia
