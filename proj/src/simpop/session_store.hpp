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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace simpop {

/// Coarse action categories. Raw labels are kept on the action so the
/// canonical file round-trips; the kind decides how the reference is read.
enum class ActionKind {
    Clickout,        ///< selection from an impression list; the prediction target
    ItemInteraction, ///< rating / info / image / deals on one item
    ItemSearch,      ///< direct search for one item
    NonItem,         ///< reference is a destination, filter, sort order, ...
    Interaction,     ///< unrecognised label, reference read as an item
};

ActionKind classify_action(std::string_view label);
bool references_item(ActionKind kind) noexcept;

inline constexpr std::size_t kMaxImpressions = 25;

struct Action {
    std::string session_id;
    std::string user_id;
    std::int64_t step = 0;
    std::int64_t timestamp = 0;
    std::string action_type;
    ActionKind kind = ActionKind::Interaction;
    std::string reference;
    std::vector<std::string> impressions;

    bool is_clickout() const noexcept { return kind == ActionKind::Clickout; }
    /// The item this action touches, if any. Empty for non-item actions and
    /// for blanked targets.
    std::optional<std::string_view> item() const noexcept {
        if (!references_item(kind) || reference.empty()) return std::nullopt;
        return std::string_view(reference);
    }

    bool operator==(const Action&) const = default;
};

struct Session {
    std::string id;
    std::vector<Action> actions;

    bool operator==(const Session&) const = default;
};

enum class CorpusRole { Train, Test };

/// Immutable, validated collection of sessions. Sessions keep the order in
/// which they first appeared in the source.
class SessionCorpus {
public:
    SessionCorpus() = default;
    /// Sorts each session by step and validates every invariant; throws
    /// ValidationError naming the first offending session.
    SessionCorpus(CorpusRole role, std::vector<Session> sessions);

    CorpusRole role() const noexcept { return role_; }
    std::span<const Session> sessions() const noexcept { return sessions_; }
    std::size_t size() const noexcept { return sessions_.size(); }
    bool empty() const noexcept { return sessions_.empty(); }
    std::size_t action_count() const noexcept;
    const Session* find(std::string_view id) const;
    /// Sorted set of every item referenced or shown as an impression.
    std::span<const std::string> vocabulary() const noexcept { return vocabulary_; }

    bool operator==(const SessionCorpus& other) const {
        return role_ == other.role_ && sessions_ == other.sessions_;
    }

private:
    CorpusRole role_ = CorpusRole::Train;
    std::vector<Session> sessions_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::vector<std::string> vocabulary_;
};

/// Throws ValidationError when a session breaks the action invariants.
void validate_session(const Session& session);

/// Maps the seven logical fields onto column names.
struct Schema {
    std::string user_id = "user_id";
    std::string session_id = "session_id";
    std::string timestamp = "timestamp";
    std::string step = "step";
    std::string action_type = "action_type";
    std::string reference = "reference";
    std::string impressions = "impressions";

    /// Overrides from "field=column,field=column".
    static Schema parse(std::string_view overrides);
};

struct ParseOptions {
    /// Drop sessions that fail validation instead of rejecting the file.
    bool drop_invalid_sessions = false;
};

struct ParseStats {
    std::size_t rows = 0;
    std::size_t dropped_sessions = 0;
};

SessionCorpus parse_session_log(std::string_view text, const Schema& schema, CorpusRole role,
                                const ParseOptions& options = {}, ParseStats* stats = nullptr);
SessionCorpus load_session_log(const std::string& path, const Schema& schema, CorpusRole role,
                               const ParseOptions& options = {}, ParseStats* stats = nullptr);
std::string serialize_session_log(const SessionCorpus& corpus);

struct FilterResult {
    SessionCorpus corpus;
    std::size_t dropped = 0;
};

/// Keeps sessions with at least one clickout.
FilterResult filter_bookable_sessions(const SessionCorpus& corpus);

using TruthMap = std::map<std::string, std::string>;

struct HiddenTargets {
    SessionCorpus corpus;
    TruthMap truth;
};

/// Blanks the reference of every session's final clickout and returns the
/// original references separately.
HiddenTargets hide_test_targets(const SessionCorpus& corpus);

/// Truncates each session after its last clickout whose reference is one of
/// its impressions and drops sessions without one. Result has role Test.
SessionCorpus truncate_to_last_clickout(const SessionCorpus& corpus);

struct HoldoutSplit {
    SessionCorpus train;
    HiddenTargets validation;
};

/// Holds out the latest `fraction` of sessions (ordered by their last
/// timestamp, then id) as a hidden-target validation set.
HoldoutSplit split_holdout(const SessionCorpus& corpus, double fraction);

std::string serialize_truth(const TruthMap& truth);
TruthMap parse_truth(std::string_view text);

/// The actions a ranker may look at: everything except a trailing blanked
/// clickout (the hidden target).
std::span<const Action> session_context(const Session& session) noexcept;

} // namespace simpop
