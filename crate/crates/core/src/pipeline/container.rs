//! Binary tensor container.
//!
//! Layout: `LDON` | u16 version | u16 flags | u32 entry count | entries |
//! u32 CRC32 of everything between the magic and the checksum. Each entry is
//! u16 name length, name bytes, u8 dtype, u8 rank, u64 extents, then the
//! little-endian row-major payload. dtype 0 is f64; dtype 1 is raw bytes and
//! is used only for the `__manifest` entry.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"LDON";
pub const VERSION: u16 = 1;
pub const MANIFEST_NAME: &str = "__manifest";
pub const MAX_NAME_LEN: usize = 64;

const DTYPE_F64: u8 = 0;
const DTYPE_BYTES: u8 = 1;

/// Ordered `key = value` metadata stored alongside the tensors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest(pub BTreeMap<String, String>);

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// Required value parsed as `T`.
    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .get(key)
            .ok_or_else(|| Error::invalid(format!("manifest is missing '{key}'")))?;
        raw.parse()
            .map_err(|_| Error::invalid(format!("manifest value {key} = {raw} is malformed")))
    }

    pub fn to_text(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.0 {
            if k.contains('=') || k.contains('\n') || v.contains('\n') || k.trim() != k {
                return Err(Error::invalid(format!("manifest entry '{k}' cannot be encoded")));
            }
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for line in text.lines() {
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| Error::invalid(format!("malformed manifest line '{line}'")))?;
            map.insert(k.to_string(), v.to_string());
        }
        Ok(Self(map))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Container {
    pub tensors: Vec<(String, Tensor)>,
    pub manifest: Manifest,
}

impl Container {
    pub fn new(manifest: Manifest) -> Self {
        Self {
            tensors: Vec::new(),
            manifest,
        }
    }

    pub fn push(&mut self, name: impl Into<String>, t: Tensor) {
        self.tensors.push((name.into(), t));
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.tensors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .ok_or_else(|| Error::invalid(format!("container has no tensor '{name}'")))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut names = std::collections::HashSet::new();
        for (name, _) in &self.tensors {
            check_name(name)?;
            if name == MANIFEST_NAME || !names.insert(name.as_str()) {
                return Err(Error::invalid(format!("duplicate or reserved tensor name '{name}'")));
            }
        }
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&0u16.to_le_bytes());
        out.extend_from_slice(&((self.tensors.len() + 1) as u32).to_le_bytes());
        let manifest = self.manifest.to_text()?;
        write_header(&mut out, MANIFEST_NAME, DTYPE_BYTES, &[manifest.len()]);
        out.extend_from_slice(manifest.as_bytes());
        for (name, t) in &self.tensors {
            write_header(&mut out, name, DTYPE_F64, t.shape());
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&out[MAGIC.len()..]);
        out.extend_from_slice(&crc.to_le_bytes());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Container {
                offset: 0,
                message: "bad magic".into(),
            });
        }
        if bytes.len() < 8 + 4 {
            return Err(r.err("truncated header"));
        }
        let body_end = bytes.len() - 4;
        let stored = u32::from_le_bytes(bytes[body_end..].try_into().unwrap());
        if crc32fast::hash(&bytes[MAGIC.len()..body_end]) != stored {
            return Err(Error::Container {
                offset: body_end as u64,
                message: "checksum mismatch".into(),
            });
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::Container {
                offset: 4,
                message: format!("unsupported version {version}"),
            });
        }
        let _flags = r.u16()?;
        let count = r.u32()? as usize;
        let mut manifest = None;
        let mut tensors = Vec::new();
        for _ in 0..count {
            let entry_at = r.pos;
            let name_len = r.u16()? as usize;
            let name = std::str::from_utf8(r.take(name_len)?)
                .map_err(|_| r.err("name is not UTF-8"))?
                .to_string();
            let dtype = r.u8()?;
            let rank = r.u8()? as usize;
            let mut shape = Vec::with_capacity(rank);
            for _ in 0..rank {
                shape.push(r.u64()? as usize);
            }
            let n: usize = shape.iter().product();
            match dtype {
                DTYPE_BYTES if name == MANIFEST_NAME && rank == 1 => {
                    let text = std::str::from_utf8(r.take(n)?).map_err(|_| r.err("manifest is not UTF-8"))?;
                    manifest = Some(Manifest::from_text(text)?);
                }
                DTYPE_F64 => {
                    let raw = r.take(n.checked_mul(8).ok_or_else(|| r.err("extent overflow"))?)?;
                    let data = raw
                        .chunks_exact(8)
                        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                        .collect();
                    let t = Tensor::new(&shape, data).map_err(|e| Error::Container {
                        offset: entry_at as u64,
                        message: e.to_string(),
                    })?;
                    tensors.push((name, t));
                }
                other => {
                    return Err(Error::Container {
                        offset: entry_at as u64,
                        message: format!("unknown dtype {other} for '{name}'"),
                    })
                }
            }
            if r.pos > body_end {
                return Err(r.err("truncated entry"));
            }
        }
        if r.pos != body_end {
            return Err(r.err("trailing bytes before checksum"));
        }
        Ok(Self {
            tensors,
            manifest: manifest.unwrap_or_default(),
        })
    }

    /// Writes atomically through a sibling temporary file.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes()?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingArtifact {
                path: path.to_path_buf(),
            });
        }
        Self::from_bytes(&fs::read(path)?)
    }
}

pub fn write_tensor_container(path: &Path, tensors: &[(String, Tensor)], manifest: &Manifest) -> Result<()> {
    Container {
        tensors: tensors.to_vec(),
        manifest: manifest.clone(),
    }
    .write(path)
}

pub fn read_tensor_container(path: &Path) -> Result<(Vec<(String, Tensor)>, Manifest)> {
    let c = Container::read(path)?;
    Ok((c.tensors, c.manifest))
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.len() > MAX_NAME_LEN || !name.is_ascii() {
        return Err(Error::invalid(format!(
            "tensor name '{name}' must be 1..={MAX_NAME_LEN} ASCII bytes"
        )));
    }
    Ok(())
}

fn write_header(out: &mut Vec<u8>, name: &str, dtype: u8, shape: &[usize]) {
    out.extend_from_slice(&(name.len() as u16).to_le_bytes());
    out.extend_from_slice(name.as_bytes());
    out.push(dtype);
    out.push(shape.len() as u8);
    for &e in shape {
        out.extend_from_slice(&(e as u64).to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, message: &str) -> Error {
        Error::Container {
            offset: self.pos as u64,
            message: message.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(self.err("truncated")),
        }
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Container {
        let mut m = Manifest::new();
        m.set("kind", "pca").set("d", 16);
        let mut c = Container::new(m);
        c.push("basis", Tensor::from_fn(&[3, 2], |i| i as f64 * 0.1 - 0.2));
        c.push("b0", Tensor::scalar(-0.0));
        c
    }

    #[test]
    fn empty_container_roundtrips() {
        let c = Container::default();
        assert_eq!(Container::from_bytes(&c.to_bytes().unwrap()).unwrap(), c);
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let c = sample();
        let back = Container::from_bytes(&c.to_bytes().unwrap()).unwrap();
        assert_eq!(back.manifest.get("d"), Some("16"));
        for ((n1, t1), (n2, t2)) in c.tensors.iter().zip(&back.tensors) {
            assert_eq!(n1, n2);
            assert_eq!(t1.shape(), t2.shape());
            let a: Vec<u64> = t1.data().iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = t2.data().iter().map(|v| v.to_bits()).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn corruption_is_detected_with_offset() {
        let bytes = sample().to_bytes().unwrap();
        let mut flipped = bytes.clone();
        let at = bytes.len() - 10;
        flipped[at] ^= 0x01;
        assert!(matches!(Container::from_bytes(&flipped), Err(Error::Container { .. })));
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(Container::from_bytes(&magic), Err(Error::Container { offset: 0, .. })));
        let cut = &bytes[..bytes.len() - 20];
        assert!(matches!(Container::from_bytes(cut), Err(Error::Container { .. })));
    }

    #[test]
    fn rejects_bad_names() {
        let mut c = sample();
        c.push("basis", Tensor::scalar(1.0));
        assert!(c.to_bytes().is_err());
        let mut c = Container::default();
        c.push("x".repeat(65), Tensor::scalar(1.0));
        assert!(c.to_bytes().is_err());
        let mut c = Container::default();
        c.push("é", Tensor::scalar(1.0));
        assert!(c.to_bytes().is_err());
    }

    #[test]
    fn missing_file_names_path() {
        let err = Container::read(Path::new("/nonexistent/model.ldon")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/model.ldon"));
        assert_eq!(err.exit_code(), 3);
    }
}
