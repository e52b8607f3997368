// Copyright 2026 The simpop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "simpop/session_store.hpp"

#include "simpop/errors.hpp"
#include "simpop/text_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <set>

namespace simpop {

ActionKind classify_action(std::string_view label) {
    std::string lower(label);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower.find("clickout") != std::string::npos) return ActionKind::Clickout;
    if (lower.rfind("interaction item", 0) == 0) return ActionKind::ItemInteraction;
    if (lower == "search for item") return ActionKind::ItemSearch;
    static constexpr std::array<std::string_view, 4> kNonItem = {
        "search for destination", "search for poi", "change of sort order", "filter selection"};
    for (auto label_text : kNonItem) {
        if (lower == label_text) return ActionKind::NonItem;
    }
    return ActionKind::Interaction;
}

bool references_item(ActionKind kind) noexcept {
    return kind != ActionKind::NonItem;
}

void validate_session(const Session& session) {
    const auto fail = [&](const std::string& what) {
        throw ValidationError("session '" + session.id + "': " + what);
    };
    if (session.actions.empty()) fail("no actions");
    for (std::size_t k = 0; k < session.actions.size(); ++k) {
        const Action& a = session.actions[k];
        if (a.session_id != session.id) fail("action belongs to session '" + a.session_id + "'");
        const auto expected = static_cast<std::int64_t>(k + 1);
        if (a.step != expected) {
            if (k > 0 && a.step == session.actions[k - 1].step) {
                fail("duplicate step " + std::to_string(a.step));
            }
            fail("steps not contiguous from 1 (expected " + std::to_string(expected) + ", got " +
                 std::to_string(a.step) + ")");
        }
        if (a.impressions.size() > kMaxImpressions) {
            fail("step " + std::to_string(a.step) + " has more than 25 impressions");
        }
        if (a.is_clickout()) {
            if (a.impressions.empty()) fail("clickout at step " + std::to_string(a.step) + " has no impressions");
            if (!a.reference.empty() &&
                std::find(a.impressions.begin(), a.impressions.end(), a.reference) == a.impressions.end()) {
                fail("clickout item '" + a.reference + "' at step " + std::to_string(a.step) +
                     " is not among its impressions");
            }
        }
    }
}

SessionCorpus::SessionCorpus(CorpusRole role, std::vector<Session> sessions)
    : role_(role), sessions_(std::move(sessions)) {
    std::set<std::string> vocab;
    by_id_.reserve(sessions_.size());
    for (std::size_t s = 0; s < sessions_.size(); ++s) {
        Session& session = sessions_[s];
        std::stable_sort(session.actions.begin(), session.actions.end(),
                         [](const Action& a, const Action& b) { return a.step < b.step; });
        validate_session(session);
        if (!by_id_.emplace(session.id, s).second) {
            throw ValidationError("session '" + session.id + "' appears twice");
        }
        for (const Action& a : session.actions) {
            if (auto item = a.item()) vocab.emplace(*item);
            vocab.insert(a.impressions.begin(), a.impressions.end());
        }
    }
    vocabulary_.assign(vocab.begin(), vocab.end());
}

std::size_t SessionCorpus::action_count() const noexcept {
    std::size_t n = 0;
    for (const auto& s : sessions_) n += s.actions.size();
    return n;
}

const Session* SessionCorpus::find(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &sessions_[it->second];
}

Schema Schema::parse(std::string_view overrides) {
    Schema schema;
    overrides = text::trim(overrides);
    if (overrides.empty()) return schema;
    for (const auto& entry : text::split(overrides, ',')) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument("schema entry '" + entry + "' is not key=value");
        }
        const std::string key(text::trim(std::string_view(entry).substr(0, eq)));
        const std::string value(text::trim(std::string_view(entry).substr(eq + 1)));
        if (value.empty()) throw InvalidArgument("schema entry '" + entry + "' has empty column name");
        if (key == "user_id") schema.user_id = value;
        else if (key == "session_id") schema.session_id = value;
        else if (key == "timestamp") schema.timestamp = value;
        else if (key == "step") schema.step = value;
        else if (key == "action_type") schema.action_type = value;
        else if (key == "reference") schema.reference = value;
        else if (key == "impressions") schema.impressions = value;
        else throw InvalidArgument("unknown schema field '" + key + "'");
    }
    return schema;
}

namespace {

struct ColumnMap {
    std::size_t user_id, session_id, timestamp, step, action_type, reference, impressions;
};

ColumnMap resolve_columns(const std::vector<std::string>& header, const Schema& schema) {
    const auto find = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError(1, "header lacks column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    return {find(schema.user_id),     find(schema.session_id), find(schema.timestamp),
            find(schema.step),        find(schema.action_type), find(schema.reference),
            find(schema.impressions)};
}

} // namespace

SessionCorpus parse_session_log(std::string_view content, const Schema& schema, CorpusRole role,
                                const ParseOptions& options, ParseStats* stats) {
    if (content.size() >= 3 && content.substr(0, 3) == "\xEF\xBB\xBF") content.remove_prefix(3);
    text::LineCursor cursor(content);
    std::string_view line;
    std::vector<std::string> fields;
    if (!cursor.next(line)) throw ParseError(1, "missing header row");
    if (!text::split_csv(line, fields)) throw ParseError(1, "unterminated quote in header");
    for (auto& f : fields) f = std::string(text::trim(f));
    const std::vector<std::string> header = fields;
    const ColumnMap col = resolve_columns(header, schema);

    std::vector<Session> sessions;
    std::unordered_map<std::string, std::size_t> index;
    std::size_t rows = 0;
    while (cursor.next(line)) {
        const std::size_t ln = cursor.line_number();
        if (text::trim(line).empty()) continue;
        if (!text::split_csv(line, fields)) throw ParseError(ln, "unterminated quote");
        if (fields.size() != header.size()) {
            throw ParseError(ln, "expected " + std::to_string(header.size()) + " columns, got " +
                                     std::to_string(fields.size()));
        }
        Action a;
        a.session_id = fields[col.session_id];
        a.user_id = fields[col.user_id];
        if (a.session_id.empty()) throw ParseError(ln, "empty session id");
        const auto step = text::parse_int(fields[col.step]);
        if (!step) throw ParseError(ln, "step '" + fields[col.step] + "' is not an integer");
        const auto ts = text::parse_int(fields[col.timestamp]);
        if (!ts) throw ParseError(ln, "timestamp '" + fields[col.timestamp] + "' is not an integer");
        a.step = *step;
        a.timestamp = *ts;
        a.action_type = fields[col.action_type];
        a.kind = classify_action(a.action_type);
        a.reference = fields[col.reference];
        if (!fields[col.impressions].empty()) a.impressions = text::split(fields[col.impressions], '|');
        ++rows;

        auto [it, inserted] = index.try_emplace(a.session_id, sessions.size());
        if (inserted) sessions.push_back(Session{a.session_id, {}});
        sessions[it->second].actions.push_back(std::move(a));
    }

    std::size_t dropped = 0;
    if (options.drop_invalid_sessions) {
        std::vector<Session> kept;
        kept.reserve(sessions.size());
        for (auto& s : sessions) {
            std::stable_sort(s.actions.begin(), s.actions.end(),
                             [](const Action& a, const Action& b) { return a.step < b.step; });
            try {
                validate_session(s);
                kept.push_back(std::move(s));
            } catch (const ValidationError&) {
                ++dropped;
            }
        }
        sessions = std::move(kept);
    }
    if (stats) {
        stats->rows = rows;
        stats->dropped_sessions = dropped;
    }
    return SessionCorpus(role, std::move(sessions));
}

SessionCorpus load_session_log(const std::string& path, const Schema& schema, CorpusRole role,
                               const ParseOptions& options, ParseStats* stats) {
    const std::string content = text::read_file(path);
    return parse_session_log(content, schema, role, options, stats);
}

std::string serialize_session_log(const SessionCorpus& corpus) {
    std::string out = "user_id,session_id,timestamp,step,action_type,reference,impressions\n";
    for (const Session& s : corpus.sessions()) {
        for (const Action& a : s.actions) {
            std::string imp;
            for (std::size_t k = 0; k < a.impressions.size(); ++k) {
                if (k) imp.push_back('|');
                imp += a.impressions[k];
            }
            out += text::csv_escape(a.user_id);
            out += ',';
            out += text::csv_escape(a.session_id);
            out += ',';
            out += std::to_string(a.timestamp);
            out += ',';
            out += std::to_string(a.step);
            out += ',';
            out += text::csv_escape(a.action_type);
            out += ',';
            out += text::csv_escape(a.reference);
            out += ',';
            out += text::csv_escape(imp);
            out += '\n';
        }
    }
    return out;
}

FilterResult filter_bookable_sessions(const SessionCorpus& corpus) {
    if (corpus.role() != CorpusRole::Train) {
        throw InvalidArgument("filter_bookable_sessions expects a TRAIN corpus");
    }
    std::vector<Session> kept;
    for (const Session& s : corpus.sessions()) {
        if (std::any_of(s.actions.begin(), s.actions.end(), [](const Action& a) { return a.is_clickout(); })) {
            kept.push_back(s);
        }
    }
    const std::size_t dropped = corpus.size() - kept.size();
    return {SessionCorpus(CorpusRole::Train, std::move(kept)), dropped};
}

HiddenTargets hide_test_targets(const SessionCorpus& corpus) {
    if (corpus.role() != CorpusRole::Test) {
        throw InvalidArgument("hide_test_targets expects a TEST corpus");
    }
    std::vector<Session> hidden;
    TruthMap truth;
    hidden.reserve(corpus.size());
    for (const Session& s : corpus.sessions()) {
        const Action& last = s.actions.back();
        if (!last.is_clickout()) {
            throw ValidationError("session '" + s.id + "' does not end with a clickout");
        }
        if (last.reference.empty()) {
            throw ValidationError("session '" + s.id + "': final clickout has no item");
        }
        if (std::find(last.impressions.begin(), last.impressions.end(), last.reference) ==
            last.impressions.end()) {
            throw ValidationError("session '" + s.id + "': clickout item '" + last.reference +
                                  "' is not among its impressions");
        }
        Session copy = s;
        truth.emplace(s.id, last.reference);
        copy.actions.back().reference.clear();
        hidden.push_back(std::move(copy));
    }
    return {SessionCorpus(CorpusRole::Test, std::move(hidden)), std::move(truth)};
}

SessionCorpus truncate_to_last_clickout(const SessionCorpus& corpus) {
    std::vector<Session> out;
    for (const Session& s : corpus.sessions()) {
        for (std::size_t k = s.actions.size(); k-- > 0;) {
            const Action& a = s.actions[k];
            if (a.is_clickout() && !a.reference.empty() &&
                std::find(a.impressions.begin(), a.impressions.end(), a.reference) != a.impressions.end()) {
                Session t{s.id, std::vector<Action>(s.actions.begin(), s.actions.begin() + static_cast<std::ptrdiff_t>(k + 1))};
                out.push_back(std::move(t));
                break;
            }
        }
    }
    return SessionCorpus(CorpusRole::Test, std::move(out));
}

HoldoutSplit split_holdout(const SessionCorpus& corpus, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw InvalidArgument("holdout fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    const auto sessions = corpus.sessions();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ta = sessions[a].actions.back().timestamp;
        const auto tb = sessions[b].actions.back().timestamp;
        if (ta != tb) return ta < tb;
        return sessions[a].id < sessions[b].id;
    });
    std::size_t n_val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(order.size())));
    if (n_val == 0 && order.size() >= 2) n_val = 1;
    const std::size_t cut = order.size() - n_val;
    std::vector<bool> held(order.size(), false);
    for (std::size_t k = cut; k < order.size(); ++k) held[order[k]] = true;

    std::vector<Session> train, val;
    for (std::size_t k = 0; k < sessions.size(); ++k) {
        (held[k] ? val : train).push_back(sessions[k]);
    }
    SessionCorpus val_corpus(CorpusRole::Test, std::move(val));
    return {SessionCorpus(corpus.role(), std::move(train)),
            hide_test_targets(truncate_to_last_clickout(val_corpus))};
}

std::string serialize_truth(const TruthMap& truth) {
    std::string out;
    for (const auto& [session, item] : truth) {
        out += session;
        out += '\t';
        out += item;
        out += '\n';
    }
    return out;
}

TruthMap parse_truth(std::string_view content) {
    TruthMap truth;
    text::LineCursor cursor(content);
    std::string_view line;
    while (cursor.next(line)) {
        if (text::trim(line).empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
            throw ParseError(cursor.line_number(), "expected session_id<TAB>item_id");
        }
        std::string session(line.substr(0, tab));
        if (!truth.emplace(std::move(session), std::string(line.substr(tab + 1))).second) {
            throw ParseError(cursor.line_number(), "duplicate session in truth file");
        }
    }
    return truth;
}

std::span<const Action> session_context(const Session& session) noexcept {
    std::span<const Action> all(session.actions);
    if (!all.empty() && all.back().is_clickout() && all.back().reference.empty()) {
        return all.first(all.size() - 1);
    }
    return all;
}

} // namespace simpop
