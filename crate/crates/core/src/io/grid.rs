//! `HSLF1` float-grid container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic     5 bytes  "HSLF1"
//! version   u32      1
//! width     u32
//! height    u32
//! channels  u32
//! names     channels × (u16 byte length, UTF-8 bytes)
//! payload   channels × height × width × f32, channel-planar, row-major
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::extraction::{ClassActivationSet, PerClass, SemanticClass};
use crate::frontend::IntensityMap;
use crate::geometry::HoughGridSpec;
use crate::hough::HoughMap;

pub const MAGIC: &[u8; 5] = b"HSLF1";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct GridChannel {
    pub name: String,
    pub values: Vec<f32>,
}

/// A stack of equally sized named float planes.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatGrid {
    width: u32,
    height: u32,
    channels: Vec<GridChannel>,
}

impl FloatGrid {
    pub fn new(width: u32, height: u32, channels: Vec<GridChannel>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::GridLayout(format!("empty grid {width}x{height}")));
        }
        if channels.is_empty() {
            return Err(Error::GridLayout("no channels".into()));
        }
        let plane = width as usize * height as usize;
        for c in &channels {
            if c.values.len() != plane {
                return Err(Error::GridLayout(format!(
                    "channel {:?} has {} values, expected {plane}",
                    c.name,
                    c.values.len()
                )));
            }
            if c.name.len() > u16::MAX as usize {
                return Err(Error::GridLayout(format!("channel name of {} bytes is too long", c.name.len())));
            }
        }
        Ok(Self {
            width,
            height,
            channels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> &[GridChannel] {
        &self.channels
    }

    /// Five Hough-space channels; width is `n_r`, height is `n_theta`.
    pub fn from_activations(acts: &ClassActivationSet) -> Self {
        let spec = acts.spec();
        let channels = acts
            .channels()
            .iter()
            .map(|(c, m)| GridChannel {
                name: c.name().to_string(),
                values: m.values().to_vec(),
            })
            .collect();
        Self {
            width: spec.n_r as u32,
            height: spec.n_theta as u32,
            channels,
        }
    }

    pub fn from_intensity(name: &str, map: &IntensityMap) -> Result<Self> {
        Self::new(
            map.width() as u32,
            map.height() as u32,
            vec![GridChannel {
                name: name.to_string(),
                values: map.values().to_vec(),
            }],
        )
    }

    pub fn from_class_maps(maps: &PerClass<IntensityMap>) -> Result<Self> {
        let first = &maps[SemanticClass::AisleLeft];
        Self::new(
            first.width() as u32,
            first.height() as u32,
            maps.iter()
                .map(|(c, m)| GridChannel {
                    name: c.name().to_string(),
                    values: m.values().to_vec(),
                })
                .collect(),
        )
    }

    /// Maps channels to classes by name. Every channel must name a class
    /// and every class must appear exactly once.
    fn class_planes(&self) -> Result<PerClass<&[f32]>> {
        let mut slots: PerClass<Option<&[f32]>> = PerClass::default();
        for ch in &self.channels {
            let class: SemanticClass = ch.name.parse()?;
            if slots[class].replace(&ch.values).is_some() {
                return Err(Error::GridLayout(format!("duplicate channel {:?}", ch.name)));
            }
        }
        let found = slots.iter().filter(|(_, s)| s.is_some()).count();
        if found != 5 {
            return Err(Error::IncompleteClassSet { found });
        }
        Ok(slots.map(|_, s| s.expect("all five present")))
    }

    pub fn to_activations(&self) -> Result<ClassActivationSet> {
        let spec = HoughGridSpec::new(self.height as usize, self.width as usize)
            .map_err(|e| Error::GridLayout(format!("not a hough grid: {e}")))?;
        let planes = self.class_planes()?;
        let mut maps = Vec::with_capacity(5);
        for (_, p) in planes.iter() {
            maps.push(HoughMap::new(spec, p.to_vec())?);
        }
        let mut it = maps.into_iter();
        ClassActivationSet::new(PerClass::from_fn(|_| it.next().expect("five maps")))
    }

    pub fn to_class_maps(&self) -> Result<PerClass<IntensityMap>> {
        let planes = self.class_planes()?;
        let mut maps = Vec::with_capacity(5);
        for (_, p) in planes.iter() {
            maps.push(IntensityMap::new(self.width as usize, self.height as usize, p.to_vec())?);
        }
        let mut it = maps.into_iter();
        Ok(PerClass::from_fn(|_| it.next().expect("five maps")))
    }

    /// The single plane of a one-channel grid.
    pub fn to_intensity(&self) -> Result<IntensityMap> {
        match self.channels.as_slice() {
            [only] => IntensityMap::new(self.width as usize, self.height as usize, only.values.clone()),
            _ => Err(Error::GridLayout(format!(
                "expected a single channel, found {}",
                self.channels.len()
            ))),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let plane = self.width as usize * self.height as usize;
        let names: usize = self.channels.iter().map(|c| 2 + c.name.len()).sum();
        let mut out = Vec::with_capacity(21 + names + 4 * plane * self.channels.len());
        out.extend_from_slice(MAGIC);
        for v in [VERSION, self.width, self.height, self.channels.len() as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for c in &self.channels {
            out.extend_from_slice(&(c.name.len() as u16).to_le_bytes());
            out.extend_from_slice(c.name.as_bytes());
        }
        for c in &self.channels {
            for v in &c.values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(MAGIC.len())?;
        if magic != MAGIC {
            return Err(Error::BadMagic { found: magic.to_vec() });
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let (width, height, count) = (r.u32()?, r.u32()?, r.u32()?);
        let mut names = Vec::new();
        for k in 0..count {
            let len = r.u16()? as usize;
            let name = std::str::from_utf8(r.take(len)?)
                .map_err(|_| Error::GridLayout(format!("channel {k} name is not UTF-8")))?;
            names.push(name.to_string());
        }
        let plane = width as usize * height as usize;
        let expected = r.pos + plane * count as usize * 4;
        if bytes.len() < expected {
            return Err(Error::Truncated {
                expected,
                actual: bytes.len(),
            });
        }
        if bytes.len() > expected {
            return Err(Error::GridLayout(format!(
                "{} trailing bytes after payload",
                bytes.len() - expected
            )));
        }
        let channels = names
            .into_iter()
            .map(|name| {
                let values = r
                    .take(plane * 4)
                    .expect("length checked")
                    .chunks_exact(4)
                    .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                    .collect();
                GridChannel { name, values }
            })
            .collect();
        Self::new(width, height, channels)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Truncated {
                expected: end,
                actual: self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn activations(seed: u32) -> ClassActivationSet {
        let spec = HoughGridSpec::new(6, 9).unwrap();
        let maps = PerClass::from_fn(|c| {
            let vals = (0..spec.cells())
                .map(|k| ((k as u32 * 7 + c.index() as u32 * 13 + seed) % 17) as f32 / 16.0)
                .collect();
            HoughMap::new(spec, vals).unwrap()
        });
        ClassActivationSet::new(maps).unwrap()
    }

    #[test]
    fn header_layout_is_pinned() {
        let g = FloatGrid::new(
            2,
            1,
            vec![GridChannel {
                name: "ab".into(),
                values: vec![1.0, -0.5],
            }],
        )
        .unwrap();
        let b = g.to_bytes();
        let mut want = b"HSLF1".to_vec();
        want.extend([1, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 2, 0, b'a', b'b']);
        want.extend(1.0f32.to_le_bytes());
        want.extend((-0.5f32).to_le_bytes());
        assert_eq!(b, want);
    }

    #[test]
    fn activations_round_trip() {
        let a = activations(3);
        let back = FloatGrid::from_bytes(&FloatGrid::from_activations(&a).to_bytes())
            .unwrap()
            .to_activations()
            .unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn channel_order_is_by_name() {
        let a = activations(1);
        let mut g = FloatGrid::from_activations(&a);
        g.channels.reverse();
        assert_eq!(g.to_activations().unwrap(), a);
    }

    #[test]
    fn distinct_errors() {
        let bytes = FloatGrid::from_activations(&activations(0)).to_bytes();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(FloatGrid::from_bytes(&bad), Err(Error::BadMagic { .. })));

        let mut v2 = bytes.clone();
        v2[5] = 2;
        assert!(matches!(FloatGrid::from_bytes(&v2), Err(Error::UnsupportedVersion(2))));

        let short = &bytes[..bytes.len() - 4];
        assert!(matches!(FloatGrid::from_bytes(short), Err(Error::Truncated { .. })));

        let mut wide = bytes.clone();
        wide[9] = 10; // width 9 -> 10 without more payload
        assert!(matches!(FloatGrid::from_bytes(&wide), Err(Error::Truncated { .. })));

        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(FloatGrid::from_bytes(&long), Err(Error::GridLayout(_))));

        assert!(matches!(FloatGrid::from_bytes(b"HS"), Err(Error::Truncated { .. })));
    }

    #[test]
    fn class_set_rules() {
        let mut g = FloatGrid::from_activations(&activations(0));
        g.channels.pop();
        assert!(matches!(g.to_activations(), Err(Error::IncompleteClassSet { found: 4 })));

        let mut g = FloatGrid::from_activations(&activations(0));
        g.channels[2].name = "Shelf".into();
        assert!(matches!(g.to_activations(), Err(Error::UnknownChannel(n)) if n == "Shelf"));

        let mut g = FloatGrid::from_activations(&activations(0));
        g.channels[2].name = "AisleLeft".into();
        assert!(matches!(g.to_activations(), Err(Error::GridLayout(_))));
    }

    #[test]
    fn single_channel_intensity() {
        let m = IntensityMap::from_fn(5, 3, |x, y| (x + 10 * y) as f32).unwrap();
        let g = FloatGrid::from_bytes(&FloatGrid::from_intensity("features", &m).unwrap().to_bytes()).unwrap();
        assert_eq!(g.to_intensity().unwrap(), m);
        assert!(FloatGrid::from_activations(&activations(0)).to_intensity().is_err());
    }

    #[test]
    fn negative_values_survive_but_are_rejected_as_intensity() {
        let g = FloatGrid::new(
            1,
            1,
            vec![GridChannel {
                name: "x".into(),
                values: vec![-1.0],
            }],
        )
        .unwrap();
        let back = FloatGrid::from_bytes(&g.to_bytes()).unwrap();
        assert_eq!(back, g);
        assert!(back.to_intensity().is_err());
    }

    proptest! {
        #[test]
        fn arbitrary_bits_round_trip(
            w in 1u32..8, h in 1u32..8, bits in proptest::collection::vec(any::<u32>(), 64..65),
        ) {
            let n = (w * h) as usize;
            let values: Vec<f32> = bits.iter().cycle().take(n).map(|b| f32::from_bits(*b)).collect();
            let g = FloatGrid::new(w, h, vec![GridChannel { name: "ch".into(), values }]).unwrap();
            let back = FloatGrid::from_bytes(&g.to_bytes()).unwrap();
            let same = g.channels[0].values.iter().zip(&back.channels[0].values).all(|(a, b)| a.to_bits() == b.to_bits());
            prop_assert!(same);
        }
    }
}
