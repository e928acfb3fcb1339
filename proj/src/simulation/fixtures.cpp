#include "belief/simulation/fixtures.hpp"

namespace belief::fixtures {

namespace {

constexpr Stance D = Stance::DemocratLeaning;
constexpr Stance R = Stance::RepublicanLeaning;

const char* const kMinimumWageD =
    "The minimum wage increasing will allow more people to have more money, stimulating the economy and helping "
    "citizens who are currently in poverty reach out of it, take a foothold, and stay in the middle class.";
const char* const kDeathPenaltyD =
    "A just society's goal should be to protect and further the wellbeing of its people (and, indeed, of all "
    "people, since being just requires a lack of bias toward or against other societies). Killing people as a form "
    "of punishment does not, as a rule, serve the interest of such a society.";
const char* const kGlobalWarmingD =
    "CO2 is the largest contribution to global warming, at 72% of greenhouse gas emissions, and greenhouse gas "
    "emissions are a major contributor to global warming.";
const char* const kAbortionR =
    "Abortion is morally unacceptable, and it goes against the qualities and ethics that make this country great.";
const char* const kGunControlR =
    "More guns equals less crime. Just because crimes were committed with guns it does not mean control would work.";
const char* const kGlobalWarmingR =
    "The media coverage on pollution affecting global warming on a grand scale is a scam lead by liberals such as Al "
    "Gore, Michael Moore and the liberal media.";

const char* const kRepresentativeDescription =
    "US adults who identify with either the Democratic or the Republican party, in equal numbers.";

CampaignConfig base_campaign(std::vector<Statement> statements, ElicitationMode mode, double fraction,
                             std::uint64_t seed) {
    CampaignConfig c;
    c.statements = std::move(statements);
    c.groups = {kDemocrat, kRepublican};
    c.mode = mode;
    c.incentive_arms.incentivized_fraction = fraction;
    c.population_description = kRepresentativeDescription;
    c.seed = seed;
    return c;
}

void add_cell(sim::CalibrationSummary& s, const GroupId& g, Stance st, double jm, double jsd, double bm, double bsd) {
    s.rows.push_back({g, st, ResponseKind::Judgement, jm, jsd});
    s.rows.push_back({g, st, ResponseKind::BeliefMidpoint, bm, bsd});
}

}  // namespace

std::vector<Statement> exp1_statements() {
    return {
        {"D1", "minimum wage", kMinimumWageD, D},   {"D2", "death penalty", kDeathPenaltyD, D},
        {"D3", "global warming", kGlobalWarmingD, D}, {"R1", "abortion", kAbortionR, R},
        {"R2", "gun control", kGunControlR, R},      {"R3", "global warming", kGlobalWarmingR, R},
    };
}

std::vector<Statement> exp2_statements() {
    return {
        {"D1", "minimum wage", kMinimumWageD, D},
        {"D2", "death penalty", kDeathPenaltyD, D},
        {"R1", "abortion", kAbortionR, R},
        {"R2", "gun control", kGunControlR, R},
    };
}

std::vector<Statement> pilot_statements() {
    return {
        {"P1", "abortion", kAbortionR, R},
        {"P2", "abortion", "I feel that a woman can do whatever she wants with her body.", D},
        {"P3", "gun control",
         "More guns equals less crime. Just because crimes where committed with guns it does not mean control would "
         "work.",
         R},
        {"P4", "gun control",
         "Background checks are a way that the government keeps guns out of known criminals' hands and people with "
         "mental health issues, without infringing upon the rights of normal citizens.",
         D},
        {"P5", "minimum wage",
         "Minimum wage laws are not only unnecessary but counterproductive because competition for workers keeps "
         "wages up and wage controls discourage hiring.",
         R},
        {"P6", "minimum wage", kMinimumWageD, D},
        {"P7", "same-sex marriage",
         "Gay Marriage cannot be legislated as legal because the laws associated to governing it are outside the "
         "declaration of Marriage.",
         R},
        {"P8", "same-sex marriage", "I believe that gay marriage is acceptable, and disallowing it is discriminatory.",
         D},
        {"P9", "feminism is necessary",
         "We do not need feminism in this country anymore for it has done some good things but has evolved to the "
         "point that all it does now is degrading males and trying to get more rights for women while men get less "
         "rights.",
         R},
        {"P10", "feminism is necessary",
         "Women's bodies are treated as a commodity here in the west, many ads show women in scantily clad clothing "
         "often in suggestive poses. Sexual objectification dehumanizes women in both men and women's eyes a woman "
         "becomes just an object and not a person so a man feels free to treat her as one.",
         D},
        {"P11", "death penalty",
         "I think that the death penalty makes much more sense than does solitary confinement for life because the "
         "taxpayers of the country that the criminal broke the laws of have to suffer from paying for food, "
         "medicine, and security for said criminal.",
         R},
        {"P12", "death penalty", kDeathPenaltyD, D},
        {"P13", "global warming", kGlobalWarmingR, R},
        {"P14", "global warming", kGlobalWarmingD, D},
    };
}

CampaignConfig exp1_campaign(std::uint64_t seed) {
    return base_campaign(exp1_statements(), ElicitationMode::AggregateBelief, 0.5, seed);
}

CampaignConfig exp2_campaign(std::uint64_t seed) {
    return base_campaign(exp2_statements(), ElicitationMode::PerGroupBelief, 0.0, seed);
}

sim::CalibrationSummary exp1_summary(std::uint64_t seed) {
    sim::CalibrationSummary s;
    s.group_sizes = {{kDemocrat, 641}, {kRepublican, 619}};
    s.mode = ElicitationMode::AggregateBelief;
    s.incentivized_fraction = 0.5;
    s.seed = seed;
    add_cell(s, kDemocrat, D, 0.72, 0.26, 0.59, 0.14);
    add_cell(s, kDemocrat, R, 0.44, 0.35, 0.48, 0.15);
    add_cell(s, kRepublican, D, 0.62, 0.29, 0.56, 0.15);
    add_cell(s, kRepublican, R, 0.56, 0.31, 0.51, 0.16);
    return s;
}

sim::CalibrationSummary exp2_summary(std::uint64_t seed) {
    sim::CalibrationSummary s;
    s.group_sizes = {{kDemocrat, 169}, {kRepublican, 161}};
    s.mode = ElicitationMode::PerGroupBelief;
    s.incentivized_fraction = 0.0;
    s.seed = seed;
    add_cell(s, kDemocrat, D, 0.73, 0.23, 0.56, 0.11);
    add_cell(s, kDemocrat, R, 0.51, 0.31, 0.52, 0.12);
    add_cell(s, kRepublican, D, 0.66, 0.27, 0.58, 0.12);
    add_cell(s, kRepublican, R, 0.56, 0.34, 0.51, 0.11);
    return s;
}

}  // namespace belief::fixtures
