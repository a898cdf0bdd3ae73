#pragma once

#include <gsr/core/error.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gsr {

// Question and answer phrasing, keyed "<task>.<part>". Placeholders are
// written {name}. The shipped catalog is listed in docs/templates.md; a JSON
// object with the same keys overrides individual entries.
class TemplateCatalog {
 public:
  static const TemplateCatalog& builtin() {
    static const TemplateCatalog catalog{{
        {"object_count.question", "How many {category}(s) are in this room?"},
        {"object_count.analysis",
         "The question is asking for the number of {category} instances in the room. To solve this, I can count "
         "them directly from the video without identifying any object bounding boxes."},
        {"object_count.conclusion", "From the video, there are {answer} {category}(s) in the room."},
        {"abs_distance.question", "What is the distance between the centers of the {object_a} and the {object_b} (in meters)?"},
        {"abs_distance.analysis",
         "The question is asking for the distance between the {object_a} and the {object_b}. To solve this, I can "
         "identify all relevant objects and their bounding boxes first."},
        {"object_size.question", "What is the diagonal length of the bounding box of the {object} (in centimeters)?"},
        {"object_size.analysis",
         "The question is asking for the size of the {object}. To solve this, I can identify all relevant objects and "
         "their bounding boxes first."},
        {"room_size.question",
         "What is the size of this room (in square meters)? If multiple rooms are shown, estimate the size of the "
         "combined space."},
        {"room_size.analysis",
         "The question is asking for the room size in square meters. To solve this, I can rely on the overall spatial "
         "information present in the video without identifying any object bounding boxes."},
        {"room_size.conclusion", "From the video, the room size is about {answer} m²."},
        {"rel_distance.question",
         "Measuring from the center of each object, which of these objects ({choices}) is the closest to the {anchor}?"},
        {"rel_distance.analysis",
         "The question is asking which object is the closest to the {anchor}. To solve this, I can identify all "
         "relevant objects and their bounding boxes first."},
        {"rel_direction.question",
         "If I am standing by the {observer} and facing the {facing}, is the {target} to the left or the right of the "
         "{facing}?"},
        {"rel_direction.analysis",
         "The question is asking for the relative direction of the {target} with respect to my position (at the "
         "{observer}) while facing the {facing}. To solve this, I can identify all relevant objects and their bounding "
         "boxes first."},
        {"appearance_order.question",
         "What will be the first-time appearance order of the following categories in the video: {choices}?"},
        {"appearance_order.analysis",
         "The question is asking for the order in which the objects first appear in the video. To solve this, I can "
         "rely on the temporal information in the video without identifying any object bounding boxes."},
        {"appearance_order.conclusion", "From the video, the objects first appear in the order {order}. Option {answer} is correct."},
        {"route_plan.question",
         "You start at the {start} and walk to the {goal}. Which sequence of actions follows the route?"},
        {"route_plan.analysis",
         "The question is asking for the turns along the route from the {start} to the {goal}. To solve this, I can "
         "identify all relevant objects and their bounding boxes first."},
        {"cot.prompt",
         "You are given a bird's-eye-view map of an indoor scene, rendered from its point cloud with brighter pixels "
         "higher above the floor. Bounding boxes of the relevant objects are outlined in the colors listed below. "
         "Coordinates are in meters with z pointing up.\n\n"
         "Question: {question}\n"
         "Answer: {answer}\n"
         "Objects:\n{objects}\n"
         "Write the step-by-step reasoning that reaches this answer from the object coordinates. Compute every "
         "quantity you use explicitly. End with the answer alone inside <answer></answer>."},
    }};
    return catalog;
  }

  TemplateCatalog() = default;
  explicit TemplateCatalog(std::map<std::string, std::string> entries) : entries_(std::move(entries)) {}

  // Builtin catalog with entries replaced by those of a JSON object file.
  static TemplateCatalog with_overrides(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open template file " + path);
    TemplateCatalog c = builtin();
    const auto j = nlohmann::json::parse(in);
    for (const auto& [k, v] : j.items()) {
      if (!c.entries_.count(k)) throw InputError("unknown template key '" + k + "' in " + path);
      c.entries_[k] = v.get<std::string>();
    }
    return c;
  }

  const std::string& get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw InputError("missing template '" + key + "'");
    return it->second;
  }

  std::string fill(const std::string& key, const std::vector<std::pair<std::string, std::string>>& vars) const {
    std::string s = get(key);
    for (const auto& [name, value] : vars) {
      const std::string token = "{" + name + "}";
      for (std::size_t at = s.find(token); at != std::string::npos; at = s.find(token, at + value.size())) {
        s.replace(at, token.size(), value);
      }
    }
    return s;
  }

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace gsr
