//! Published state-level census facts and fixed structural choices the
//! generator reproduces.

/// 2010 state population and race mix, in percent of the state total.
/// `h` counts Hispanics of any race; the other shares are non-Hispanic.
pub struct StateMix {
    pub postal: &'static str,
    pub pop: u64,
    pub b: f64,
    pub h: f64,
    pub a: f64,
    pub na: f64,
    pub nh: f64,
    pub t: f64,
}

const fn mix(postal: &'static str, pop: u64, b: f64, h: f64, a: f64, na: f64) -> StateMix {
    StateMix { postal, pop, b, h, a, na, nh: 0.06, t: 1.9 }
}

pub static STATE_MIX: &[StateMix] = &[
    mix("AL", 4_779_736, 26.2, 3.9, 1.1, 0.6),
    StateMix { postal: "AK", pop: 710_231, b: 3.3, h: 5.5, a: 5.4, na: 14.8, nh: 0.9, t: 7.3 },
    mix("AZ", 6_392_017, 4.1, 29.6, 2.8, 4.6),
    mix("AR", 2_915_918, 15.4, 6.4, 1.2, 0.8),
    mix("CA", 37_253_956, 6.2, 37.6, 13.0, 1.0),
    mix("CO", 5_029_196, 4.0, 20.7, 2.8, 1.1),
    mix("CT", 3_574_097, 10.1, 13.4, 3.8, 0.3),
    mix("DE", 897_934, 21.4, 8.2, 3.2, 0.5),
    mix("DC", 601_723, 50.7, 9.1, 3.5, 0.3),
    mix("FL", 18_801_310, 16.0, 22.5, 2.4, 0.4),
    mix("GA", 9_687_653, 30.5, 8.8, 3.2, 0.3),
    StateMix { postal: "HI", pop: 1_360_301, b: 1.6, h: 8.9, a: 38.6, na: 0.3, nh: 10.0, t: 23.6 },
    mix("ID", 1_567_582, 0.6, 11.2, 1.2, 1.4),
    mix("IL", 12_830_632, 14.5, 15.8, 4.6, 0.3),
    mix("IN", 6_483_802, 9.1, 6.0, 1.6, 0.3),
    mix("IA", 3_046_355, 2.9, 5.0, 1.7, 0.4),
    mix("KS", 2_853_118, 5.9, 10.5, 2.4, 1.0),
    mix("KY", 4_339_367, 7.8, 3.1, 1.1, 0.2),
    mix("LA", 4_533_372, 32.0, 4.2, 1.5, 0.7),
    mix("ME", 1_328_361, 1.2, 1.3, 1.0, 0.6),
    mix("MD", 5_773_552, 29.4, 8.2, 5.5, 0.4),
    mix("MA", 6_547_629, 6.6, 9.6, 5.3, 0.2),
    mix("MI", 9_883_640, 14.2, 4.4, 2.4, 0.6),
    mix("MN", 5_303_925, 5.2, 4.7, 4.0, 1.1),
    mix("MS", 2_967_297, 37.0, 2.7, 0.9, 0.5),
    mix("MO", 5_988_927, 11.6, 3.5, 1.6, 0.5),
    mix("MT", 989_415, 0.4, 2.9, 0.6, 6.3),
    mix("NE", 1_826_341, 4.5, 9.2, 1.8, 1.0),
    mix("NV", 2_700_551, 8.1, 26.5, 7.2, 1.2),
    mix("NH", 1_316_470, 1.1, 2.8, 2.2, 0.2),
    mix("NJ", 8_791_894, 13.7, 17.7, 8.3, 0.3),
    mix("NM", 2_059_179, 2.1, 46.3, 1.4, 9.4),
    mix("NY", 19_378_102, 15.9, 17.6, 7.3, 0.6),
    mix("NC", 9_535_483, 21.5, 8.4, 2.2, 1.3),
    mix("ND", 672_591, 1.2, 2.0, 1.0, 5.4),
    mix("OH", 11_536_504, 12.2, 3.1, 1.7, 0.2),
    mix("OK", 3_751_351, 7.4, 8.9, 1.7, 8.6),
    mix("OR", 3_831_074, 1.8, 11.7, 3.7, 1.4),
    mix("PA", 12_702_379, 10.8, 5.7, 2.7, 0.2),
    mix("RI", 1_052_567, 5.7, 12.4, 2.9, 0.6),
    mix("SC", 4_625_364, 27.9, 5.1, 1.3, 0.4),
    mix("SD", 814_180, 1.3, 2.7, 0.9, 8.8),
    mix("TN", 6_346_105, 16.7, 4.6, 1.4, 0.3),
    mix("TX", 25_145_561, 11.8, 37.6, 3.8, 0.7),
    mix("UT", 2_763_885, 1.1, 13.0, 2.0, 1.2),
    mix("VT", 625_741, 1.0, 1.5, 1.3, 0.4),
    mix("VA", 8_001_024, 19.4, 7.9, 5.5, 0.4),
    mix("WA", 6_724_540, 3.6, 11.2, 7.2, 1.5),
    mix("WV", 1_852_994, 3.4, 1.2, 0.7, 0.2),
    mix("WI", 5_686_986, 6.3, 5.9, 2.3, 1.0),
    mix("WY", 563_626, 0.8, 8.9, 0.8, 2.4),
];

/// 2010 populations of large or otherwise named counties. Every other county
/// gets a lognormal share of its state's remainder.
pub static PINNED_POPULATIONS: &[(&str, &str, u64)] = &[
    ("AL", "Jefferson County", 658_466),
    ("AZ", "Maricopa County", 3_817_117),
    ("AZ", "Pima County", 980_263),
    ("CA", "Los Angeles County", 9_818_605),
    ("CA", "San Diego County", 3_095_313),
    ("CA", "Orange County", 3_010_232),
    ("CA", "Riverside County", 2_189_641),
    ("CA", "San Bernardino County", 2_035_210),
    ("CA", "Santa Clara County", 1_781_642),
    ("CA", "Alameda County", 1_510_271),
    ("CA", "Sacramento County", 1_418_788),
    ("CA", "Contra Costa County", 1_049_025),
    ("CA", "Fresno County", 930_450),
    ("CA", "Kern County", 839_631),
    ("CA", "San Francisco County", 805_235),
    ("CO", "Denver County", 600_158),
    ("CO", "El Paso County", 622_263),
    ("CO", "Broomfield County", 55_889),
    ("CO", "Fremont County", 46_824),
    ("DC", "District of Columbia", 601_723),
    ("FL", "Miami-Dade County", 2_496_435),
    ("FL", "Broward County", 1_748_066),
    ("FL", "Palm Beach County", 1_320_134),
    ("FL", "Hillsborough County", 1_229_226),
    ("FL", "Orange County", 1_145_956),
    ("FL", "Pinellas County", 916_542),
    ("FL", "Duval County", 864_263),
    ("GA", "Fulton County", 920_581),
    ("GA", "Gwinnett County", 805_321),
    ("GA", "DeKalb County", 691_893),
    ("GA", "Cobb County", 688_078),
    ("IL", "Cook County", 5_194_675),
    ("IL", "Winnebago County", 295_266),
    ("IL", "Saline County", 24_913),
    ("IN", "Marion County", 903_393),
    ("IN", "Jefferson County", 32_428),
    ("IN", "Orange County", 19_840),
    ("MD", "Montgomery County", 971_777),
    ("MD", "Prince George's County", 863_420),
    ("MD", "Baltimore city", 620_961),
    ("MI", "Wayne County", 1_820_584),
    ("MI", "Oakland County", 1_202_362),
    ("MN", "Hennepin County", 1_152_425),
    ("MO", "St. Louis County", 998_954),
    ("MO", "Jackson County", 674_158),
    ("MO", "St. Louis city", 319_294),
    ("MO", "Clay County", 221_939),
    ("MO", "Cass County", 99_478),
    ("MO", "Platte County", 89_322),
    ("NC", "Mecklenburg County", 919_628),
    ("NC", "Wake County", 900_993),
    ("NM", "Bernalillo County", 662_564),
    ("NM", "Doña Ana County", 209_233),
    ("NV", "Clark County", 1_951_269),
    ("NY", "Kings County", 2_504_700),
    ("NY", "Queens County", 2_230_722),
    ("NY", "New York County", 1_585_873),
    ("NY", "Suffolk County", 1_493_350),
    ("NY", "Bronx County", 1_385_108),
    ("NY", "Nassau County", 1_339_532),
    ("NY", "Westchester County", 949_113),
    ("NY", "Erie County", 919_040),
    ("NY", "Richmond County", 468_730),
    ("OH", "Cuyahoga County", 1_280_122),
    ("OH", "Franklin County", 1_163_414),
    ("OH", "Hamilton County", 802_374),
    ("OH", "Delaware County", 174_214),
    ("OH", "Fairfield County", 146_156),
    ("OK", "Oklahoma County", 718_633),
    ("OK", "Tulsa County", 603_403),
    ("OK", "Cleveland County", 255_755),
    ("OK", "Canadian County", 115_541),
    ("OK", "Pottawatomie County", 69_442),
    ("OK", "Grady County", 52_431),
    ("OR", "Multnomah County", 735_334),
    ("OR", "Washington County", 529_710),
    ("OR", "Clackamas County", 375_992),
    ("PA", "Philadelphia County", 1_526_006),
    ("PA", "Allegheny County", 1_223_348),
    ("SD", "Minnehaha County", 169_468),
    ("SD", "Todd County", 9_612),
    ("TN", "Shelby County", 927_644),
    ("TN", "Davidson County", 626_681),
    ("TX", "Harris County", 4_092_459),
    ("TX", "Dallas County", 2_368_139),
    ("TX", "Tarrant County", 1_809_034),
    ("TX", "Bexar County", 1_714_773),
    ("TX", "Travis County", 1_024_266),
    ("TX", "El Paso County", 800_647),
    ("TX", "Collin County", 782_341),
    ("TX", "Hidalgo County", 774_769),
    ("TX", "Denton County", 662_614),
    ("TX", "Fort Bend County", 585_375),
    ("TX", "Montgomery County", 455_746),
    ("TX", "Williamson County", 422_679),
    ("TX", "Hays County", 157_107),
    ("TX", "Kaufman County", 103_350),
    ("TX", "Rockwall County", 78_337),
    ("UT", "Salt Lake County", 1_029_655),
    ("VA", "Fairfax County", 1_081_726),
    ("VA", "Virginia Beach city", 437_994),
    ("VA", "Norfolk city", 242_803),
    ("VA", "Chesapeake city", 222_209),
    ("VA", "Newport News city", 180_719),
    ("VA", "Suffolk city", 84_585),
    ("VA", "Hopewell city", 22_591),
    ("WA", "King County", 1_931_249),
];

/// Cities spanning several counties: (state, city, county names).
pub static MULTI_COUNTY_CITIES: &[(&str, &str, &[&str])] = &[
    ("GA", "Atlanta", &["Fulton County", "DeKalb County"]),
    ("MO", "Kansas City", &["Jackson County", "Clay County", "Platte County", "Cass County"]),
    ("OH", "Columbus", &["Franklin County", "Delaware County", "Fairfield County"]),
    (
        "OK",
        "Oklahoma City",
        &["Oklahoma County", "Canadian County", "Cleveland County", "Pottawatomie County"],
    ),
    ("OR", "Portland", &["Multnomah County", "Washington County", "Clackamas County"]),
    ("TX", "Austin", &["Travis County", "Williamson County", "Hays County"]),
    (
        "TX",
        "Dallas",
        &["Dallas County", "Collin County", "Denton County", "Kaufman County", "Rockwall County"],
    ),
    ("TX", "Houston", &["Harris County", "Fort Bend County", "Montgomery County"]),
];

/// States whose agencies report no arrests at all.
pub static NON_REPORTING_STATES: &[&str] = &["AK", "FL", "DC"];

/// States where only the listed counties report arrests.
pub static PARTIALLY_REPORTING_STATES: &[(&str, &[&str])] = &[
    ("AL", &["Jefferson County"]),
    ("IL", &["Cook County", "Winnebago County"]),
];

/// Further counties without arrest data that still see incidents.
pub static NON_REPORTING_COUNTIES: &[(&str, &str)] = &[
    ("CO", "Broomfield County"),
    ("IN", "Jefferson County"),
    ("IN", "Orange County"),
    ("NY", "Bronx County"),
    ("NY", "Queens County"),
    ("SD", "Todd County"),
    ("TN", "Davidson County"),
    ("VA", "Chesapeake city"),
    ("VA", "Hopewell city"),
    ("VA", "Newport News city"),
    ("VA", "Norfolk city"),
    ("VA", "Suffolk city"),
    ("VA", "Virginia Beach city"),
];

/// Variant spellings the employee table uses for some counties.
pub static EMPLOYEE_SPELLINGS: &[(&str, &str, &str)] = &[
    ("GA", "Richmond County", "Augusta-Richmond"),
    ("TN", "Trousdale County", "Hartsville-Trousdale"),
    ("IL", "DuPage County", "Du Page County"),
    ("IL", "LaSalle County", "La Salle County"),
    ("IN", "LaPorte County", "La Porte County"),
    ("IN", "LaGrange County", "Lagrange County"),
    ("MN", "Lac qui Parle County", "Lac Qui Parle County"),
    ("ND", "LaMoure County", "Lamoure County"),
    ("TX", "DeWitt County", "Dewitt County"),
    ("SC", "Dillon County", "Dillion County"),
    ("IA", "Poweshiek County", "Poweshick County Police Department"),
    ("LA", "Assumption Parish", "Assymption Parish"),
    ("AL", "DeKalb County", "De Kalb County"),
    ("GA", "DeKalb County", "De Kalb County"),
    ("IL", "DeKalb County", "De Kalb County"),
    ("IN", "DeKalb County", "De Kalb County"),
    ("MO", "DeKalb County", "De Kalb County"),
    ("TN", "DeKalb County", "De Kalb County"),
];

/// Victim race totals, `Race::ALL` order, of incidents kept in both modes.
pub const KEPT_RACES: [u64; 6] = [654, 314, 12, 21, 229, 19];
/// Victim race totals of incidents dropped only for lack of arrest data.
pub const ARREST_EXCLUDED_RACES: [u64; 6] = [79, 68, 6, 1, 22, 2];
pub const MISSING_RACE: usize = 77;
/// Body-camera incidents per race over race-known incidents.
pub const BODY_CAMERA_RACES: [u64; 6] = [64, 38, 4, 1, 24, 1];
pub const MISSING_RACE_BODY_CAMERA: usize = 7;

pub const LEE_LINKABLE_ROWS: usize = 2795;
pub const ARREST_REPORTING_CODES: usize = 2754;
/// Incident ids are drawn from this range.
pub const ID_RANGE: (u32, u32) = (3, 1720);

/// Mean non-Hispanic NH-plus-multiracial county share per vintage.
pub const OTHER_SHARE_2010: f64 = 0.0248;
pub const OTHER_SHARE_2016: f64 = 0.0286;

/// Split of Hispanic residents over census races W, B, NA, A, NH, T.
pub const HISPANIC_ALLOCATION: [f64; 6] = [0.85, 0.03, 0.03, 0.01, 0.005, 0.075];

/// National arrest shares for W, B, NA, A (2014 national arrest table). County
/// arrest rates per race are scaled so the national totals land on these.
pub const NATIONAL_ARREST_SHARES: [f64; 4] = [0.694, 0.283, 0.012, 0.011];

pub static OFFENSES: &[(&str, &str, f64)] = &[
    ("01A", "Murder and nonnegligent manslaughter", 0.005),
    ("03", "Robbery", 0.03),
    ("04", "Aggravated assault", 0.06),
    ("05", "Burglary", 0.06),
    ("06", "Larceny-theft", 0.2),
    ("07", "Motor vehicle theft", 0.02),
    ("08", "Other assaults", 0.16),
    ("18", "Drug abuse violations", 0.22),
    ("21", "Driving under the influence", 0.17),
    ("24", "Disorderly conduct", 0.075),
];
