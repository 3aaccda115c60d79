#pragma once

// Heralding logic: an electrical delay plus AND gate that fires when n
// consecutive slots carry an effective herald, and the router drive
// schedule that follows from it.
//
// Overlapping runs are claimed greedily left to right. A slot consumed by a
// trigger cannot start or join another one, so a run of L consecutive
// heralds yields floor(L / n) triggers.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spconv/model.hpp"

namespace spconv {

/// Streaming form of detect_runs. Records must arrive in increasing slot
/// order; gaps in slot_index (sparse streams) break a run.
class RunDetector {
  public:
    explicit RunDetector(int run_length);

    std::optional<TriggerEvent> push(const SlotRecord& record);
    int run_length() const { return run_length_; }

  private:
    int run_length_;
    int current_ = 0;
    std::int64_t run_start_ = 0;
    std::int64_t last_slot_ = 0;
};

std::vector<TriggerEvent> detect_runs(std::span<const SlotRecord> slots, int run_length);

struct RouterCommand {
    int photon = 0;
    int port = 0;
    std::int64_t switch_slot = 0;  // signal slot at which the router takes this setting
};

struct DriveSchedule {
    std::vector<RouterCommand> commands;  // one per photon, in photon order
};

/// Photon j of the run goes to port j; it passes the routers at signal slot
/// start_slot + j + delay_offset_slots.
DriveSchedule drive_schedule(const TriggerEvent& trigger, const ControllerParams& controller = {});

}  // namespace spconv
