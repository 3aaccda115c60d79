#pragma once

// Shared domain types for the serial-parallel converter simulator.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spconv {

enum class Strategy { ActiveHeralded, ActiveClocked, PassiveBeamsplitter };

/// CLI/config spelling: "heralded", "clocked", "passive".
std::string_view to_string(Strategy strategy);
std::optional<Strategy> parse_strategy(std::string_view name);

/// Heralded pair source driven by a pulsed pump. Time is counted in pump
/// slots; the heralding arm is split over two detectors A and B.
struct SourceParams {
    double pair_prob = 0.0;
    double rep_rate_hz = 82e6;
    double herald_det_efficiency = 1.0;
    std::int64_t herald_deadtime_slots = 0;
    // When set, overrides herald_deadtime_slots during validation
    // (ceil(seconds * rep_rate_hz)) and is cleared afterwards.
    std::optional<double> herald_deadtime_s;
    double herald_splitter_ratio = 0.5;  // fraction of idlers sent to A
    double signal_det_efficiency = 1.0;  // eta_D, same at every output detector
    bool multi_pair_enabled = false;

    bool operator==(const SourceParams&) const = default;
};

/// Router chain converting n serial photons into n spatial modes.
struct ConverterParams {
    int n_modes = 2;
    Strategy strategy = Strategy::ActiveHeralded;
    double transmittance = 1.0;
    // eta_i: probability photon i leaves on port i given it survived loss.
    std::vector<double> port_efficiencies{1.0, 1.0};

    int router_count() const { return n_modes - 1; }
    /// t * mean(eta_i); zero for an empty efficiency list.
    double switching_efficiency() const;

    bool operator==(const ConverterParams&) const = default;
};

struct ControllerParams {
    // Constant offset between the herald stream and the signal stream at the
    // routers. Zero means the optical delay exactly compensates the
    // electronics.
    std::int64_t delay_offset_slots = 0;

    bool operator==(const ControllerParams&) const = default;
};

struct SlotRecord {
    std::int64_t slot_index = 0;
    bool signal_present = false;
    int signal_photons = 0;  // 2 only with multi-pair emission
    bool herald_a_fired = false;
    bool herald_b_fired = false;
    bool herald_effective = false;

    bool operator==(const SlotRecord&) const = default;
};

struct TriggerEvent {
    std::int64_t start_slot = 0;
    int run_length = 0;
    std::vector<int> drive_schedule;  // target port of photon j

    bool operator==(const TriggerEvent&) const = default;
};

/// Identity-scheduled trigger covering slots [start_slot, start_slot + n).
TriggerEvent make_trigger(std::int64_t start_slot, int run_length);

/// Per-photon outcome markers in OutputRecord::photon_port.
inline constexpr int kPhotonLost = -1;    // absorbed by transmittance loss
inline constexpr int kPhotonAbsent = -2;  // no signal photon in the routed slot

struct OutputRecord {
    TriggerEvent trigger_ref;
    std::vector<int> photon_port;          // exit port of photon j, or a marker
    std::vector<bool> photon_detected;     // photon j registered (after eta_D)
    std::vector<bool> port_detections;     // port i registered its own photon i
    int lost_photons = 0;

    int run_length() const { return static_cast<int>(photon_port.size()); }
    int absent_photons() const;
    int routed_photons() const;
    /// Every port registered its designated photon, i.e. a time-aligned
    /// n-fold coincidence.
    bool coincidence() const;
};

enum class EstimateMethod { ClosedForm, MonteCarlo, Pipeline };
std::string_view to_string(EstimateMethod method);
std::optional<EstimateMethod> parse_estimate_method(std::string_view name);

struct EfficiencyEstimate {
    double value = 0.0;
    double std_error = 0.0;
    EstimateMethod method = EstimateMethod::ClosedForm;

    static EfficiencyEstimate closed_form(double value);
    /// Rejects negative or non-finite errors.
    static EfficiencyEstimate with_error(double value, double std_error, EstimateMethod method);
};

struct SimulationReport {
    double c_n_rate = 0.0;
    double c_h_rate = 0.0;
    double p_h1_etaD = 0.0;
    EfficiencyEstimate s_estimate;
    std::uint64_t seed = 0;
    std::string config_digest;
    std::int64_t slots_simulated = 0;
    double wall_time_s = 0.0;
};

struct Violation {
    std::string field;
    std::string message;

    bool operator==(const Violation&) const = default;
};

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<Violation> violations);
    explicit ConfigError(const std::string& message);

    /// Single violation at a dotted key path.
    static ConfigError at(std::string field, std::string message);

    const std::vector<Violation>& violations() const { return violations_; }

  private:
    std::vector<Violation> violations_;
};

std::vector<Violation> check(const SourceParams& source);
std::vector<Violation> check(const ConverterParams& converter);

/// ceil(seconds * rep_rate_hz), tolerant of floating-point noise on exact
/// multiples.
std::int64_t deadtime_to_slots(double seconds, double rep_rate_hz);

/// Source and converter parameters that passed every range check. Only
/// validate_config can produce one.
class ValidatedConfig {
  public:
    const SourceParams& source() const { return source_; }
    const ConverterParams& converter() const { return converter_; }

    bool operator==(const ValidatedConfig&) const = default;

  private:
    ValidatedConfig(SourceParams source, ConverterParams converter)
        : source_(std::move(source)), converter_(std::move(converter)) {}

    SourceParams source_;
    ConverterParams converter_;

    friend ValidatedConfig validate_config(SourceParams, ConverterParams);
};

/// Normalizes (deadtime to slots, empty port list to all-ones) and checks
/// every field. Throws ConfigError listing all violations.
ValidatedConfig validate_config(SourceParams source, ConverterParams converter);

}  // namespace spconv
