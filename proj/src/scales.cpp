#include "maims/scales.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "maims/error.hpp"
#include "maims/records.hpp"
#include "maims/text.hpp"

namespace maims {

using nlohmann::json;

const AnswerOption* ScaleItem::find_option(const std::string& code) const {
    auto it = std::find_if(options.begin(), options.end(), [&](const AnswerOption& o) { return o.code == code; });
    return it == options.end() ? nullptr : &*it;
}

const ScaleItem* MentalScale::find_item(const std::string& item_id) const {
    auto it = std::find_if(items.begin(), items.end(), [&](const ScaleItem& i) { return i.item_id == item_id; });
    return it == items.end() ? nullptr : &*it;
}

std::vector<std::string> validate_scale(const MentalScale& scale) {
    std::vector<std::string> out;
    if (text::trim(scale.scale_id).empty()) out.emplace_back("scale_id is empty");
    if (scale.items.empty()) out.emplace_back("scale has no items");

    std::set<std::string> seen_items;
    for (const auto& item : scale.items) {
        const std::string where = "item " + item.item_id;
        if (text::trim(item.item_id).empty()) out.emplace_back("item with empty item_id");
        if (!seen_items.insert(item.item_id).second) out.emplace_back("duplicate item id: " + item.item_id);
        if (text::trim(item.prompt).empty()) out.emplace_back(where + ": empty prompt");
        if (item.options.size() < 2) out.emplace_back(where + ": fewer than 2 options");

        std::set<std::string> seen_codes;
        std::size_t valued = 0;
        for (const auto& opt : item.options) {
            if (text::trim(opt.code).empty()) out.emplace_back(where + ": option with empty code");
            else if (!seen_codes.insert(opt.code).second) out.emplace_back(where + ": duplicate option code: " + opt.code);
            if (text::trim(opt.text).empty()) out.emplace_back(where + " option " + opt.code + ": empty text");
            if (opt.value) ++valued;
        }
        if (valued != 0 && valued != item.options.size())
            out.emplace_back(where + ": mixed valued and unvalued options");
    }
    return out;
}

namespace {

std::string get_string(const json& j, const char* key, const std::string& where, bool required,
                       std::vector<std::string>& problems) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        if (required) problems.push_back(where + ": missing " + key);
        return {};
    }
    if (!it->is_string()) {
        problems.push_back(where + ": " + key + " must be a string");
        return {};
    }
    return it->get<std::string>();
}

} // namespace

MentalScale scale_from_json(const json& j) {
    std::vector<std::string> problems;
    MentalScale scale;
    if (!j.is_object()) throw MalformedScale({"scale document must be a JSON object"});

    scale.scale_id = get_string(j, "scale_id", "scale", true, problems);
    scale.name = get_string(j, "name", "scale", false, problems);
    scale.version = get_string(j, "version", "scale", false, problems);
    scale.description = get_string(j, "description", "scale", false, problems);

    auto items = j.find("items");
    if (items == j.end() || !items->is_array()) {
        problems.emplace_back("scale: items must be an array");
    } else {
        for (std::size_t i = 0; i < items->size(); ++i) {
            const json& ji = (*items)[i];
            std::string where = "items[" + std::to_string(i) + "]";
            if (!ji.is_object()) {
                problems.push_back(where + ": must be an object");
                continue;
            }
            ScaleItem item;
            item.item_id = get_string(ji, "item_id", where, true, problems);
            if (!item.item_id.empty()) where = "item " + item.item_id;
            item.prompt = get_string(ji, "prompt", where, true, problems);
            item.criteria = get_string(ji, "criteria", where, false, problems);
            auto opts = ji.find("options");
            if (opts == ji.end() || !opts->is_array()) {
                problems.push_back(where + ": options must be an array");
            } else {
                for (std::size_t k = 0; k < opts->size(); ++k) {
                    const json& jo = (*opts)[k];
                    std::string owhere = where + " options[" + std::to_string(k) + "]";
                    if (!jo.is_object()) {
                        problems.push_back(owhere + ": must be an object");
                        continue;
                    }
                    AnswerOption opt;
                    opt.code = get_string(jo, "code", owhere, true, problems);
                    opt.text = get_string(jo, "text", owhere, true, problems);
                    auto v = jo.find("value");
                    if (v != jo.end() && !v->is_null()) {
                        if (v->is_number()) opt.value = v->get<double>();
                        else problems.push_back(owhere + ": value must be a number");
                    }
                    item.options.push_back(std::move(opt));
                }
            }
            scale.items.push_back(std::move(item));
        }
    }

    if (problems.empty()) problems = validate_scale(scale);
    if (!problems.empty()) throw MalformedScale(std::move(problems));
    return scale;
}

json scale_to_json(const MentalScale& scale) {
    json items = json::array();
    for (const auto& item : scale.items) {
        json opts = json::array();
        for (const auto& o : item.options) {
            json jo = {{"code", o.code}, {"text", o.text}};
            if (o.value) jo["value"] = *o.value;
            opts.push_back(std::move(jo));
        }
        items.push_back({{"item_id", item.item_id},
                         {"prompt", item.prompt},
                         {"criteria", item.criteria},
                         {"options", std::move(opts)}});
    }
    return {{"scale_id", scale.scale_id},
            {"name", scale.name},
            {"version", scale.version},
            {"description", scale.description},
            {"items", std::move(items)}};
}

MentalScale load_scale(const std::string& path) {
    if (!std::filesystem::exists(path)) throw FileNotFound(path);
    json j;
    try {
        j = json::parse(text::read_file(path));
    } catch (const json::parse_error& e) {
        throw MalformedScale({std::string("invalid JSON: ") + e.what()});
    }
    return scale_from_json(j);
}

void save_scale(const MentalScale& scale, const std::string& path) {
    text::write_file_atomic(path, scale_to_json(scale).dump(2) + "\n");
}

std::optional<ScoreSummary> score_scale(const ScaleResponse& response, const MentalScale& scale) {
    if (response.scale_id != scale.scale_id) throw ScaleMismatch(scale.scale_id, response.scale_id);
    ScoreSummary summary;
    bool all_valued = true;
    for (const auto& r : response.items) {
        if (r.mention == MentionCategory::NoMention) continue;
        const ScaleItem* item = scale.find_item(r.item_id);
        if (item == nullptr) throw UnknownOption(r.item_id, r.selected_option.value_or("-"));
        const std::string code = r.selected_option.value_or("");
        const AnswerOption* opt = item->find_option(code);
        if (opt == nullptr) throw UnknownOption(r.item_id, code);
        ++summary.answered_count;
        if (opt->value) summary.total += *opt->value;
        else all_valued = false;
    }
    if (!all_valued) return std::nullopt;
    return summary;
}

std::optional<ScoreRange> score_range(const MentalScale& scale) {
    ScoreRange range;
    for (const auto& item : scale.items) {
        if (item.options.empty() || !item.options.front().value) return std::nullopt;
        double lo = *item.options.front().value;
        double hi = lo;
        for (const auto& o : item.options) {
            if (!o.value) return std::nullopt;
            lo = std::min(lo, *o.value);
            hi = std::max(hi, *o.value);
        }
        range.min_total += lo;
        range.max_total += hi;
    }
    return range;
}

} // namespace maims
