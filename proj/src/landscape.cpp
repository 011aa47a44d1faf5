#include <sstream>

#include <json.hpp>

#include "stochrob/landscape.hpp"

namespace stochrob {

namespace {

nlohmann::json pair(const Interval& i) { return nlohmann::json::array({i.lo, i.hi}); }

}  // namespace

std::string landscape_json(const RobustnessResult& res, const PiecewiseEstimate* piecewise) {
    using nlohmann::json;
    json doc;
    doc["dims"] = res.dims;
    json space = json::array();
    for (const auto& i : res.space) space.push_back(pair(i));
    doc["space"] = space;
    json boxes = json::array();
    for (const auto& b : res.boxes) {
        json box = json::array();
        for (const auto& i : b.box) box.push_back(pair(i));
        json entry{{"box", box}, {"d_lo", b.d_mean.lo}, {"d_hi", b.d_mean.hi}};
        if (res.initial.size() > 1) {
            json per = json::array();
            for (const auto& d : b.d) per.push_back(pair(d));
            entry["d_states"] = per;
        }
        boxes.push_back(entry);
    }
    doc["boxes"] = boxes;
    doc["r_lo"] = res.r.lo;
    doc["r_hi"] = res.r.hi;
    doc["err"] = res.err();
    doc["requested_err"] = res.requested_err;
    doc["semantics"] = res.semantics;
    doc["formula"] = res.formula;
    doc["status"] = to_string(res.status);
    doc["box_count"] = res.boxes.size();
    doc["approximate"] = res.approximate;
    doc["initial_states"] = res.initial;
    json per = json::array();
    for (const auto& r : res.per_state) per.push_back(pair(r));
    doc["per_state"] = per;
    doc["violating"] = res.violating;
    if (piecewise) doc["piecewise"] = {{"r_lo", piecewise->r.lo}, {"r_hi", piecewise->r.hi}, {"conservative", piecewise->conservative}};
    return doc.dump(2) + "\n";
}

std::string landscape_csv(const RobustnessResult& res) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& d : res.dims) os << d << "_lo," << d << "_hi,";
    os << "d_lo,d_hi\n";
    for (const auto& b : res.boxes) {
        for (const auto& i : b.box) os << i.lo << ',' << i.hi << ',';
        os << b.d_mean.lo << ',' << b.d_mean.hi << '\n';
    }
    return os.str();
}

}  // namespace stochrob
