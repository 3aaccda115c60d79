#include "spconv/controller.hpp"

#include <stdexcept>

namespace spconv {

RunDetector::RunDetector(int run_length) : run_length_(run_length) {
    if (run_length < 1) throw std::invalid_argument("run length must be >= 1");
}

std::optional<TriggerEvent> RunDetector::push(const SlotRecord& record) {
    if (!record.herald_effective) {
        current_ = 0;
        return std::nullopt;
    }
    if (current_ == 0 || record.slot_index != last_slot_ + 1) {
        current_ = 0;
        run_start_ = record.slot_index;
    }
    last_slot_ = record.slot_index;
    if (++current_ < run_length_) return std::nullopt;
    current_ = 0;
    return make_trigger(run_start_, run_length_);
}

std::vector<TriggerEvent> detect_runs(std::span<const SlotRecord> slots, int run_length) {
    RunDetector detector(run_length);
    std::vector<TriggerEvent> triggers;
    for (const auto& rec : slots) {
        if (auto trigger = detector.push(rec)) triggers.push_back(std::move(*trigger));
    }
    return triggers;
}

DriveSchedule drive_schedule(const TriggerEvent& trigger, const ControllerParams& controller) {
    DriveSchedule schedule;
    schedule.commands.reserve(static_cast<std::size_t>(trigger.run_length));
    for (int j = 0; j < trigger.run_length; ++j) {
        const int port = trigger.drive_schedule.empty() ? j : trigger.drive_schedule[static_cast<std::size_t>(j)];
        schedule.commands.push_back({j, port, trigger.start_slot + j + controller.delay_offset_slots});
    }
    return schedule;
}

}  // namespace spconv
